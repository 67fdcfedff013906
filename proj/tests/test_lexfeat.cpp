#include <gtest/gtest.h>

#include <cmath>

#include "diastyle/error.hpp"
#include "diastyle/lexfeat.hpp"

using namespace diastyle;

namespace {

Cohort cohort_of(const std::string& label, std::vector<std::string> texts) {
  Cohort c{label, {}};
  for (std::size_t i = 0; i < texts.size(); ++i) c.messages.push_back({label + std::to_string(i), label, texts[i], std::nullopt});
  return c;
}

const char* kDic =
    "%\n"
    "1\tposemo\n"
    "2\tnegemo\n"
    "%\n"
    "good\t1\n"
    "nice*\t1\n"
    "bad\t2\n"
    "sad*\t2\n"
    "ok\t1 2\n";

}  // namespace

TEST(Lexicon, ParsesTwoSectionFormat) {
  const auto lex = parse_lexicon(kDic);
  ASSERT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex.categories()[0], "posemo");
  EXPECT_EQ(lex.entries(0), (std::vector<std::string>{"good", "nice*", "ok"}));
  EXPECT_EQ(lex.match("nicely"), (std::vector<std::size_t>{0}));
  EXPECT_EQ(lex.match("ok"), (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(lex.match("goods").empty());
  EXPECT_TRUE(lex.match("nic").empty());
}

TEST(Lexicon, SimpleCategory) {
  const auto lex = Lexicon::from_categories({{"posemo", {"good", "nice*"}}});
  EXPECT_EQ(lex.size(), 1u);
  EXPECT_EQ(lex.entries(0).size(), 2u);
}

TEST(Lexicon, Errors) {
  EXPECT_THROW(parse_lexicon("%\n1\tposemo\n%\ngood\t3\n"), DataError);
  EXPECT_THROW(parse_lexicon("%\n1\tposemo\n%\ngood\t1\nGood\t1\n"), DataError);
  EXPECT_THROW(parse_lexicon("%\n1\tposemo\n%\nni*ce\t1\n"), DataError);
  EXPECT_THROW(parse_lexicon("good\t1\n"), DataError);
  EXPECT_THROW(parse_lexicon("%\n1\tposemo\n"), DataError);
  EXPECT_THROW(Lexicon::from_categories({{"a", {"x"}}, {"a", {"y"}}}), DataError);
  EXPECT_THROW(Lexicon::from_categories({{"a", {"**"}}}), DataError);
}

TEST(Profile, PrefixPercentage) {
  const auto lex = Lexicon::from_categories({{"posemo", {"good", "nice*"}}});
  const auto p = profile_year(cohort_of("2014", {"good nice nicely bad"}), lex);
  ASSERT_EQ(p.percentages.size(), 1u);
  EXPECT_DOUBLE_EQ(p.percentages[0].second, 75.0);
  EXPECT_EQ(p.words, 4u);
}

TEST(Profile, WordsPerSentence) {
  EXPECT_EQ(count_sentences("I came. I saw!"), 2u);
  EXPECT_EQ(count_sentences("a...b?!\n\nc"), 3u);
  EXPECT_EQ(count_sentences("..."), 0u);
  const auto p = profile_year(cohort_of("2014", {"I came. I saw!"}), Lexicon{});
  EXPECT_DOUBLE_EQ(p.wps, 2.0);
  EXPECT_TRUE(p.percentages.empty());
  // a message with words but only punctuation-free text counts once
  const auto q = profile_year(cohort_of("2015", {"ok lah", "one. two."}), Lexicon{});
  EXPECT_EQ(q.sentences, 3u);
}

TEST(Profile, CaseAndPunctuationFolded) {
  const auto lex = Lexicon::from_categories({{"posemo", {"good"}}});
  const auto p = profile_year(cohort_of("2014", {"GOOD! Good, good"}), lex);
  EXPECT_DOUBLE_EQ(p.percentages[0].second, 100.0);
}

TEST(Profile, ZeroWordsRejected) {
  EXPECT_THROW(profile_year(cohort_of("2014", {"", "  "}), Lexicon{}), DataError);
}

TEST(Profile, UnionCategoryCoversEverything) {
  EXPECT_THROW(Lexicon::from_categories({{"all", {"*x"}}}), DataError);
  const auto lex = Lexicon::from_categories({{"abc", {"a*", "b*", "c*"}}, {"a", {"a*"}}});
  const auto p = profile_year(cohort_of("2014", {"apple banana cherry", "avocado"}), lex);
  EXPECT_DOUBLE_EQ(p.percentages[0].second, 100.0);
  EXPECT_DOUBLE_EQ(p.percentages[1].second, 50.0);
  for (const auto& [k, v] : p.percentages) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 100.0);
  }
}

TEST(Summary, LinearCombination) {
  const auto vars = parse_summary_config(R"({"Tone": {"posemo": 2.0, "negemo": -1.0, "intercept": 10}, "Depth": {"WPS": 0.5}})");
  ASSERT_EQ(vars.size(), 2u);
  const auto lex = parse_lexicon(kDic);
  // 4 words: good(pos) bad(neg) nice(pos) x -> pos 50, neg 25; 2 sentences
  const auto p = profile_year(cohort_of("2014", {"good bad. nice x"}), lex, vars);
  ASSERT_EQ(p.summary.size(), 2u);
  std::map<std::string, double> s(p.summary.begin(), p.summary.end());
  EXPECT_DOUBLE_EQ(s.at("Tone"), 10.0 + 2.0 * 50.0 - 25.0);
  EXPECT_DOUBLE_EQ(s.at("Depth"), 0.5 * 2.0);

  const auto bad = parse_summary_config(R"({"X": {"nosuch": 1}})");
  EXPECT_THROW(profile_year(cohort_of("2014", {"good"}), lex, bad), DataError);
  EXPECT_THROW(parse_summary_config("[1]"), DataError);
  EXPECT_THROW(parse_summary_config(R"({"X": {"a": "b"}})"), DataError);
}

TEST(Pca, CorrelatedPairHasEqualLoadings) {
  std::vector<std::vector<double>> rows;
  for (int y = 0; y < 6; ++y) rows.push_back({1.0 * y, 3.0 * y + 2.0, std::sin(y * 1.7)});
  const auto l = first_principal_loadings(rows);
  EXPECT_NEAR(std::abs(l[0]), std::abs(l[1]), 1e-9);
}

TEST(Pca, SingleFeatureCategory) {
  std::vector<std::vector<double>> rows{{1.0, 5.0}, {2.0, 5.0}, {4.0, 5.0}};
  ::testing::internal::CaptureStderr();
  const auto r = pca_top_features({"f", "constant"}, rows, {{"f", "solo"}, {"constant", "solo"}}, 5);
  const auto err = ::testing::internal::GetCapturedStderr();
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].features, (std::vector<std::string>{"f"}));
  EXPECT_NEAR(r[0].abs_loadings[0], 1.0, 1e-12);
  EXPECT_EQ(r[0].dropped, (std::vector<std::string>{"constant"}));
  EXPECT_NE(err.find("constant"), std::string::npos);
}

TEST(Pca, TopKOrderedAndSignInvariant) {
  std::vector<std::string> names;
  std::map<std::string, std::string> cat;
  for (int f = 0; f < 12; ++f) {
    names.push_back("f" + std::to_string(f));
    cat[names.back()] = "big";
  }
  std::vector<std::vector<double>> rows;
  for (int y = 0; y < 10; ++y) {
    std::vector<double> r;
    for (int f = 0; f < 12; ++f) r.push_back(std::sin(0.3 * y * (f + 1)) + 0.1 * f * y);
    rows.push_back(r);
  }
  const auto out = pca_top_features(names, rows, cat, 5);
  ASSERT_EQ(out.size(), 1u);
  ASSERT_EQ(out[0].features.size(), 5u);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_GE(out[0].abs_loadings[i - 1], out[0].abs_loadings[i]);

  const auto loadings = first_principal_loadings(rows);
  std::vector<double> negated;
  for (double v : loadings) negated.push_back(-v);
  EXPECT_EQ(rank_by_abs_loading(names, loadings), rank_by_abs_loading(names, negated));
}

TEST(Pca, TieBrokenByName) {
  EXPECT_EQ(rank_by_abs_loading({"b", "a", "c"}, {0.5, -0.5, 0.1}), (std::vector<std::size_t>{1, 0, 2}));
}

TEST(Pca, Errors) {
  std::vector<std::vector<double>> two{{1.0}, {2.0}};
  EXPECT_THROW(pca_top_features({"f"}, two, {{"f", "c"}}, 1), DataError);
  std::vector<std::vector<double>> flat{{1.0}, {1.0}, {1.0}};
  ::testing::internal::CaptureStderr();
  EXPECT_THROW(pca_top_features({"f"}, flat, {{"f", "c"}}, 1), DataError);
  ::testing::internal::GetCapturedStderr();
}
