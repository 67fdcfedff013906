#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "diastyle/corpus.hpp"
#include "synthetic.hpp"

using namespace diastyle;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') q += "'\\''";
    else q += c;
  }
  return q + "'";
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("diastyle_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(const std::vector<std::string>& args) {
    std::string cmd = quote(DIASTYLE_CLI);
    for (const auto& a : args) cmd += " " + quote(a);
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    cmd += " >" + quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  // Ten synthetic years plus one generated cohort.
  fs::path write_corpus(std::size_t per_cohort = 60) {
    testkit::SyntheticSpec spec;
    spec.per_cohort = per_cohort;
    const auto years = testkit::synthetic_corpus(spec);
    std::vector<Message> all;
    for (const auto& c : years.cohorts()) all.insert(all.end(), c.messages.begin(), c.messages.end());
    const auto gen = testkit::synthetic_cohort("mistral/DD", 6, per_cohort, 5);
    all.insert(all.end(), gen.messages.begin(), gen.messages.end());
    const auto path = dir_ / "corpus.jsonl";
    std::ofstream(path) << to_jsonl(Corpus::from_messages(all));
    return path;
  }

  fs::path write_lexicon() {
    const auto path = dir_ / "mini.dic";
    std::ofstream(path) << "%\n1\tparticle\n2\tfood\n3\tpronoun\n%\nlah\t1\nlor\t1\nleh\t1\nsia\t1\nmakan\t2\nkopi\t2\n"
                           "you\t3\nme\t3\nmy\t3\nhim\t3\nwe\t3\n";
    return path;
  }

  std::string ws() const { return (dir_ / "ws").string(); }

  CliRun extract(bool lexicon = false) {
    std::vector<std::string> args{"extract", "-w", ws(), "-i", write_corpus().string()};
    if (lexicon) {
      args.push_back("--lexicon");
      args.push_back(write_lexicon().string());
    }
    return run(args);
  }

  std::vector<std::string> fast() const { return {"--runs", "1", "--n-estimators", "15"}; }

  std::vector<std::string> with(std::vector<std::string> base, const std::vector<std::string>& extra) const {
    base.insert(base.end(), extra.begin(), extra.end());
    return base;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, Version) {
  const auto r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "diastyle 0.3.0 (format 1)\n");
}

TEST_F(CliTest, ExtractHappyPathWithoutLexicon) {
  const auto r = extract();
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "ws" / "features.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "ws" / "corpus.jsonl"));
  EXPECT_FALSE(fs::exists(dir_ / "ws" / "lexicon_profiles.json"));
  EXPECT_NE(r.err.find("no --lexicon given, lexicon profiles skipped"), std::string::npos);
  EXPECT_EQ(slurp(dir_ / "ws" / "features.csv").substr(0, 15), "id,length_char,");
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "ws" / "manifest.json"));
  EXPECT_EQ(manifest["tool_version"], "0.3.0");
  EXPECT_TRUE(manifest["artifacts"].contains("features.csv"));
  EXPECT_EQ(manifest["artifacts"]["features.csv"]["command"], "extract");
}

TEST_F(CliTest, MissingInputIsUsageError) {
  const auto r = run({"extract", "-w", ws(), "-i", (dir_ / "nope.jsonl").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run({"extract", "-w", ws()}).code, 2);
  EXPECT_EQ(run({"no-such-command"}).code, 2);
}

TEST_F(CliTest, MalformedCorpusIsDataError) {
  const auto bad = dir_ / "bad.jsonl";
  std::ofstream(bad) << "{\"id\": \"a\", \"year\": 2012, \"text\": \"hi\"}\n{broken\n";
  const auto r = run({"extract", "-w", ws(), "-i", bad.string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, GapCurveShapeAndDeterminism) {
  ASSERT_EQ(extract().code, 0);
  const auto args = with({"gap-curve", "-w", ws(), "--seed", "7"}, fast());
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv_path = dir_ / "ws" / "reports" / "handcrafted" / "gap_curve.csv";
  const auto csv = slurp(csv_path);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "T,mean_S,std");
  for (int t = 1; t <= 9; ++t) {
    ASSERT_TRUE(std::getline(lines, line));
    EXPECT_EQ(line.substr(0, line.find(',')), std::to_string(t));
  }
  EXPECT_FALSE(std::getline(lines, line));

  const auto json = slurp(dir_ / "ws" / "reports" / "handcrafted" / "gap_curve.json");
  const auto doc = nlohmann::json::parse(json);
  EXPECT_EQ(doc["meta"]["seed"], 7);
  EXPECT_EQ(doc["pairs"].size(), 45u);

  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(slurp(csv_path), csv);
  EXPECT_EQ(slurp(dir_ / "ws" / "reports" / "handcrafted" / "gap_curve.json"), json);

  ASSERT_EQ(run(with(args, {"--threads", "1"})).code, 0);
  EXPECT_EQ(slurp(dir_ / "ws" / "reports" / "handcrafted" / "gap_curve.json"), json);

  ASSERT_EQ(run(with({"gap-curve", "-w", ws(), "--seed", "8"}, fast())).code, 0);
  EXPECT_NE(slurp(dir_ / "ws" / "reports" / "handcrafted" / "gap_curve.json"), json);
}

TEST_F(CliTest, EmbeddingWithoutVectorsNamesArtifact) {
  ASSERT_EQ(extract().code, 0);
  const auto r = run({"gap-curve", "-w", ws(), "--features", "embedding"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("embeddings.jsonl"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("import-embeddings"), std::string::npos) << r.err;
}

TEST_F(CliTest, EmbeddingPipeline) {
  ASSERT_EQ(extract().code, 0);
  const auto corpus = ingest(dir_ / "ws" / "corpus.jsonl", CorpusFormat::jsonl);
  const auto emb = dir_ / "emb.jsonl";
  std::ofstream(emb) << testkit::synthetic_embeddings_jsonl(corpus, 8);
  const auto imp = run({"import-embeddings", "-w", ws(), "-i", emb.string()});
  ASSERT_EQ(imp.code, 0) << imp.err;
  EXPECT_NE(imp.out.find("dim 8"), std::string::npos);
  const auto r = run(with({"gap-curve", "-w", ws(), "--features", "embedding"}, fast()));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "ws" / "reports" / "embedding" / "gap_curve.csv"));
}

TEST_F(CliTest, AlignShapeAndSigmaScaling) {
  ASSERT_EQ(extract().code, 0);
  const auto base = with({"align", "-w", ws(), "--cohort", "mistral/DD"}, fast());
  ASSERT_EQ(run(base).code, 0);
  const auto path = dir_ / "ws" / "reports" / "handcrafted" / "alignment_mistral_DD.json";
  const auto a = nlohmann::json::parse(slurp(path));
  EXPECT_EQ(a["per_year"].size(), 10u);
  EXPECT_EQ(a["per_year"][0]["year"], "2012");
  for (const char* key : {"mean", "std"}) EXPECT_TRUE(a.contains(key));
  EXPECT_EQ(a["variance_test"]["sigma0"].get<double>(), 0.01);
  EXPECT_EQ(a["variance_test"]["n"], 10);
  EXPECT_TRUE(a["variance_test"].contains("p"));
  EXPECT_TRUE(fs::exists(dir_ / "ws" / "reports" / "handcrafted" / "alignment_mistral_DD.csv"));

  ASSERT_EQ(run(with(base, {"--sigma0", "0.02"})).code, 0);
  const auto b = nlohmann::json::parse(slurp(path));
  EXPECT_EQ(b["per_year"], a["per_year"]);
  EXPECT_NEAR(b["variance_test"]["chi2"].get<double>(), a["variance_test"]["chi2"].get<double>() / 4.0,
              1e-12 * a["variance_test"]["chi2"].get<double>());

  const auto missing = run({"align", "-w", ws(), "--cohort", "gpt/ZS"});
  EXPECT_EQ(missing.code, 3);
  EXPECT_NE(missing.err.find("gpt/ZS"), std::string::npos);
}

TEST_F(CliTest, ShapReport) {
  ASSERT_EQ(extract().code, 0);
  const auto r = run(with({"shap", "-w", ws()}, fast()));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir_ / "ws" / "reports" / "handcrafted" / "shap.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "feature,mean_shap,std,t,p,significant");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 16);
  EXPECT_TRUE(fs::exists(dir_ / "ws" / "reports" / "handcrafted" / "shap_by_gap.csv"));
  EXPECT_EQ(run({"shap", "-w", ws(), "--unit", "year"}).code, 2);
}

TEST_F(CliTest, ParticlesReport) {
  ASSERT_EQ(extract().code, 0);
  const auto r = run({"particles", "-w", ws(), "--particles", "lah,lor"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir_ / "ws" / "reports" / "particles.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "year,lah,lor,combined");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);  // header, 10 years, generated cohort
  EXPECT_NE(csv.find("\n2012,"), std::string::npos);
}

TEST_F(CliTest, TrendsSignificanceColumn) {
  ASSERT_EQ(extract(true).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "ws" / "lexicon_profiles.csv"));
  const auto cats = dir_ / "cats.json";
  std::ofstream(cats) << R"({"particle": "markers", "food": "markers", "pronoun": "markers", "WPS": "structure"})";
  const auto r = run({"trends", "-w", ws(), "--categories", cats.string(), "--top-k", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir_ / "ws" / "reports" / "trends.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "feature,slope,rho,p,significant");
  std::map<std::string, std::string> flag;
  while (std::getline(lines, line)) {
    const auto last = line.substr(line.rfind(',') + 1);
    EXPECT_TRUE(last == "0" || last == "1") << line;
    flag[line.substr(0, line.find(','))] = last;
  }
  EXPECT_EQ(flag.size(), 4u);
  EXPECT_EQ(flag["particle"], "1");  // particle share falls every year
  EXPECT_EQ(flag["WPS"], "1");       // messages grow longer
  const auto doc = nlohmann::json::parse(slurp(dir_ / "ws" / "reports" / "trends.json"));
  EXPECT_EQ(doc["pca"][0]["features"].size(), 2u);
}

TEST_F(CliTest, TrendsWithoutLexiconNamesProducer) {
  ASSERT_EQ(extract().code, 0);
  const auto r = run({"trends", "-w", ws()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("lexicon_profiles.json"), std::string::npos) << r.err;
}

TEST_F(CliTest, GenerateDryRun) {
  const auto r = run({"generate", "--scheme", "DD", "--dry-run"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(fs::path(DIASTYLE_GOLDEN_DIR) / "prompt_DD.txt") + "\n");
  EXPECT_EQ(run({"generate", "--scheme", "XX", "--dry-run"}).code, 2);
  EXPECT_EQ(run({"generate", "--model", "m", "--endpoint", "http://127.0.0.1:9", "--count", "1"}).code, 2);  // no --output
}

TEST_F(CliTest, GenerateUnreachableIsRemoteError) {
  const auto r = run({"generate", "--endpoint", "http://127.0.0.1:9", "--model", "m", "--count", "1",
                      "--max-attempts", "1", "--timeout", "1", "-o", (dir_ / "gen.jsonl").string()});
  EXPECT_EQ(r.code, 4);
  EXPECT_FALSE(fs::exists(dir_ / "gen.jsonl"));
}

TEST_F(CliTest, ConfigFileWithOverride) {
  ASSERT_EQ(extract().code, 0);
  const auto config = dir_ / "config.json";
  std::ofstream(config) << R"({"seed": 11, "gap-curve": {"runs": 1, "n-estimators": 15}})";
  ASSERT_EQ(run({"--config", config.string(), "gap-curve", "-w", ws()}).code, 0);
  const auto path = dir_ / "ws" / "reports" / "handcrafted" / "gap_curve.json";
  const auto from_config = slurp(path);
  EXPECT_EQ(nlohmann::json::parse(from_config)["meta"]["seed"], 11);

  ASSERT_EQ(run({"gap-curve", "-w", ws(), "--seed", "11", "--runs", "1", "--n-estimators", "15"}).code, 0);
  EXPECT_EQ(slurp(path), from_config);

  ASSERT_EQ(run({"--config", config.string(), "gap-curve", "-w", ws(), "--seed", "12"}).code, 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(path))["meta"]["seed"], 12);

  std::ofstream(config) << R"({"gap-curve": {"no-such-option": 1}})";
  EXPECT_EQ(run({"--config", config.string(), "gap-curve", "-w", ws()}).code, 2);
}

TEST_F(CliTest, LockedWorkspaceRefused) {
  ASSERT_EQ(extract().code, 0);
  std::ofstream(dir_ / "ws" / ".lock") << "12345\n";
  const auto r = run({"particles", "-w", ws()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("locked"), std::string::npos);
  fs::remove(dir_ / "ws" / ".lock");
  EXPECT_EQ(run({"particles", "-w", ws()}).code, 0);
  EXPECT_FALSE(fs::exists(dir_ / "ws" / ".lock"));
}
