#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "diastyle/error.hpp"
#include "diastyle/reports.hpp"

using namespace diastyle;
using reports::Json;

namespace {

const ReportMeta kMeta{"gap-curve", "0123456789abcdef", 42};

experiment::PairResult pair(std::string a, std::string b, double acc) {
  experiment::PairResult p;
  p.label_a = std::move(a);
  p.label_b = std::move(b);
  p.run_accuracy = {acc, acc, acc};
  p.run_similarity = {experiment::similarity(acc), experiment::similarity(acc), experiment::similarity(acc)};
  p.mean_acc = acc;
  p.similarity = experiment::similarity(acc);
  p.rows_a = p.rows_b = 100;
  return p;
}

}  // namespace

TEST(Dump, FloatsAndLayout) {
  Json j;
  j["x"] = 0.1;
  j["n"] = 3;
  j["nan"] = std::numeric_limits<double>::quiet_NaN();
  j["arr"] = Json::array({1.5, 2});
  j["empty"] = Json::object();
  EXPECT_EQ(reports::dump(j),
            "{\n  \"x\": 0.10000000000000001,\n  \"n\": 3,\n  \"nan\": null,\n  \"arr\": [\n    1.5,\n    2\n  ],\n"
            "  \"empty\": {}\n}\n");
}

TEST(Dump, SeventeenDigitsRoundTrip) {
  for (double v : {1.0 / 3.0, 0.754, 2.0 / 7.0 * 1e-9, 123456.789}) {
    Json j = Json::array({v});
    const auto back = Json::parse(reports::dump(j));
    EXPECT_EQ(back[0].get<double>(), v);
  }
}

TEST(Meta, Fields) {
  const auto j = reports::meta_json(kMeta);
  EXPECT_EQ(j["tool_version"], kToolVersion);
  EXPECT_EQ(j["format_version"], kFormatVersion);
  EXPECT_EQ(j["command"], "gap-curve");
  EXPECT_EQ(j["config_hash"], "0123456789abcdef");
  EXPECT_EQ(j["seed"], 42);
}

TEST(GapCurveReport, JsonAndCsv) {
  experiment::GapCurve curve;
  curve.pairs = {pair("2012", "2013", 0.6), pair("2012", "2014", 0.623)};
  curve.points = {{1, 1, 0.8, 0.0}, {2, 1, 0.754, 0.0}};
  const auto j = reports::to_json(curve, kMeta);
  EXPECT_EQ(j["kind"], "handcrafted");
  ASSERT_EQ(j["gaps"].size(), 2u);
  EXPECT_EQ(j["gaps"][1]["T"], 2);
  EXPECT_EQ(j["gaps"][1]["mean_S"].get<double>(), 0.754);
  EXPECT_EQ(j["pairs"][1]["a"], "2012");
  EXPECT_EQ(j["pairs"][1]["run_accuracy"].size(), 3u);
  EXPECT_EQ(reports::gap_curve_csv(curve), "T,mean_S,std\n1,0.8,0\n2,0.754,0\n");
  EXPECT_EQ(reports::pairs_csv(curve.pairs),
            "a,b,kind,mean_acc,acc_std,S\n2012,2013,handcrafted,0.6,0,0.8\n2012,2014,handcrafted,0.623,0,0.754\n");
}

TEST(AlignmentReport, ShapeAndVarianceTest) {
  experiment::AlignmentProfile p;
  p.label = "qwen-ft/CoT";
  for (int y = 2012; y <= 2021; ++y) {
    p.pairs.push_back(pair("qwen-ft/CoT", std::to_string(y), 0.66));
    p.per_year.emplace_back(std::to_string(y), 0.673);
  }
  p.mean = 0.673;
  p.std = 0.043;
  p.variance_test = stats::chi2_variance_test(10, 0.043, 0.01);
  const auto j = reports::to_json(p, {"align", "h", 1});
  EXPECT_EQ(j["cohort"], "qwen-ft/CoT");
  EXPECT_EQ(j["per_year"].size(), 10u);
  EXPECT_EQ(j["mean"].get<double>(), 0.673);
  EXPECT_EQ(j["std"].get<double>(), 0.043);
  EXPECT_EQ(j["variance_test"]["alternative"], "less");
  EXPECT_EQ(j["variance_test"]["n"], 10);
  EXPECT_NEAR(j["variance_test"]["chi2"].get<double>(), 166.41, 1e-9);
  const auto text = reports::dump(j);
  EXPECT_NE(text.find("\"mean\": 0.67300000000000004"), std::string::npos);
  EXPECT_EQ(reports::alignment_csv(p).substr(0, 21), "year,S\n2012,0.673\n201");

  p.variance_test.reset();
  EXPECT_FALSE(reports::to_json(p, kMeta).contains("variance_test"));
}

TEST(ShapReport, MissingStatisticsStayEmpty) {
  experiment::ShapTrendReport r;
  r.features = {"length_char", "constant"};
  r.stats = {{"length_char", 0.25, 0.1, 14.6, 3.7e-7, true}, {"constant", 0.0, 0.0, std::nullopt, std::nullopt, false}};
  r.by_gap = {{1, {0.2, 0.0}}, {2, {0.3, 0.0}}};
  r.pairs = {{"2012", "2013", 1, {0.2, 0.0}}};
  EXPECT_EQ(reports::shap_csv(r), "feature,mean_shap,std,t,p,significant\nlength_char,0.25,0.1,14.6,3.7e-07,1\nconstant,0,0,,,0\n");
  EXPECT_EQ(reports::shap_by_gap_csv(r), "T,length_char,constant\n1,0.2,0\n2,0.3,0\n");
  const auto j = reports::to_json(r, kMeta);
  EXPECT_EQ(j["unit"], "pair");
  EXPECT_TRUE(j["features"][1]["t"].is_null());
  EXPECT_EQ(j["features"][0]["significant"], true);
  EXPECT_EQ(j["pairs"][0]["T"], 1);
}

TEST(TrendReport, CsvAndJson) {
  experiment::TrendReport r;
  r.years = {"2012", "2013", "2014"};
  r.rows = {{"Clout", 2.33, 0.915, 0.0002, true}, {"flat", 0.0, std::nullopt, std::nullopt, false}};
  EXPECT_EQ(reports::trends_csv(r), "feature,slope,rho,p,significant\nClout,2.33,0.915,0.0002,1\nflat,0,,,0\n");
  const auto j = reports::to_json(r, {{"pronoun", {"i", "ppron"}, {0.7, 0.5}, {}}}, kMeta);
  EXPECT_EQ(j["pca"][0]["features"][1], "ppron");
  EXPECT_TRUE(j["trends"][1]["rho"].is_null());
}

TEST(LexProfiles, RoundTrip) {
  YearlyLexProfile p;
  p.label = "2014";
  p.words = 40;
  p.sentences = 5;
  p.percentages = {{"posemo", 7.5}, {"i", 1.0 / 3.0}};
  p.wps = 8.0;
  p.summary = {{"Tone", 61.25}};
  const std::vector<YearlyLexProfile> profiles{p};
  const auto back = reports::lex_profiles_from_json(reports::dump(reports::to_json(profiles, kMeta)));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].percentages, p.percentages);
  EXPECT_EQ(back[0].summary, p.summary);
  EXPECT_EQ(back[0].wps, 8.0);
  EXPECT_EQ(reports::lex_profiles_csv(profiles), "year,words,sentences,posemo,i,WPS,Tone\n2014,40,5,7.5,0.333333,8,61.25\n");
  EXPECT_THROW(reports::lex_profiles_from_json("{}"), DataError);
  EXPECT_THROW(reports::lex_profiles_from_json("not json"), DataError);
}

TEST(Particles, Csv) {
  ParticleProfile p{"2015", {"lah", "lor"}, {100.0, 50.0}, 150.0, 20};
  EXPECT_EQ(reports::particles_csv({p}), "year,lah,lor,combined\n2015,100,50,150\n");
  const auto j = reports::to_json(std::vector<ParticleProfile>{p}, kMeta);
  EXPECT_EQ(j["cohorts"][0]["per_1000"]["lor"].get<double>(), 50.0);
  EXPECT_EQ(j["cohorts"][0]["total_words"], 20);
}
