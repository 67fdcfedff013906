#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "diastyle/corpus.hpp"
#include "diastyle/csv.hpp"
#include "diastyle/error.hpp"
#include "synthetic.hpp"

using namespace diastyle;

namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Labels, NumericParsing) {
  EXPECT_EQ(numeric_label("2014"), 2014);
  EXPECT_EQ(numeric_label("-3"), -3);
  EXPECT_FALSE(numeric_label("+2014"));
  EXPECT_FALSE(numeric_label(" 2014"));
  EXPECT_FALSE(numeric_label("2014.0"));
  EXPECT_FALSE(numeric_label("mistral/DD"));
  EXPECT_FALSE(numeric_label(""));
}

TEST(Labels, OrderNumericFirst) {
  EXPECT_TRUE(label_less("9", "10"));
  EXPECT_FALSE(label_less("10", "9"));
  EXPECT_TRUE(label_less("2021", "gpt/ZS"));
  EXPECT_TRUE(label_less("gpt/CoT", "gpt/ZS"));
}

TEST(Ingest, JsonlPartitionsByYear) {
  const std::string text =
      "{\"id\":\"a\",\"year\":2012,\"text\":\"hi lah\"}\n"
      "{\"id\":\"b\",\"year\":2012,\"text\":\"ok\"}\n"
      "{\"id\":\"c\",\"year\":2013,\"text\":\"\"}\n";
  IngestReport report;
  const auto corpus = ingest_jsonl(text, &report);
  ASSERT_EQ(corpus.cohorts().size(), 2u);
  EXPECT_EQ(corpus.cohorts()[0].label, "2012");
  EXPECT_EQ(corpus.cohorts()[0].messages.size(), 2u);
  EXPECT_EQ(corpus.cohorts()[1].messages.size(), 1u);
  EXPECT_EQ(report.records, 3u);
  EXPECT_EQ(report.per_cohort.at("2012"), 2u);
  EXPECT_EQ(corpus.cohort("2013").messages[0].text, "");
}

TEST(Ingest, TenYearsSortedAscending) {
  std::string text;
  for (int y : {2019, 2012, 2021, 2015, 2013, 2020, 2014, 2016, 2018, 2017}) {
    text += "{\"id\":\"m" + std::to_string(y) + "\",\"year\":" + std::to_string(y) + ",\"text\":\"x\"}\n";
  }
  const auto corpus = ingest_jsonl(text);
  ASSERT_EQ(corpus.cohorts().size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(corpus.cohorts()[static_cast<std::size_t>(i)].label, std::to_string(2012 + i));
}

TEST(Ingest, MissingTextNamesLine) {
  const std::string text =
      "{\"id\":\"a\",\"year\":2012,\"text\":\"hi\"}\n"
      "{\"id\":\"b\",\"year\":2012}\n";
  const auto msg = error_of([&] { ingest_jsonl(text); });
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("text"), std::string::npos) << msg;
}

TEST(Ingest, RejectsDuplicatesAndMalformed) {
  EXPECT_NE(error_of([] {
              ingest_jsonl("{\"id\":\"a\",\"year\":1,\"text\":\"\"}\n{\"id\":\"a\",\"year\":2,\"text\":\"\"}\n");
            }).find("line 2"),
            std::string::npos);
  EXPECT_NE(error_of([] { ingest_jsonl("\n{\"id\":\"a\",\"year\":1,\"text\":\n"); }).find("line 2"), std::string::npos);
  EXPECT_THROW(ingest_jsonl("{\"id\":\"a\",\"text\":\"x\"}\n"), DataError);
  EXPECT_THROW(ingest_jsonl("{\"id\":3,\"year\":1,\"text\":\"x\"}\n"), DataError);
  EXPECT_THROW(ingest_jsonl("{\"id\":\"a\",\"year\":\"2012\",\"text\":\"x\"}\n"), DataError);
}

TEST(Ingest, TagsAndSource) {
  const auto corpus = ingest_jsonl(
      "{\"id\":\"g1\",\"tag\":\"qwen/CoT\",\"text\":\"hello\",\"source\":\"qwen/CoT\"}\n"
      "{\"id\":\"y1\",\"year\":2014,\"text\":\"hi\"}\n");
  ASSERT_EQ(corpus.labels(), (std::vector<std::string>{"2014", "qwen/CoT"}));
  EXPECT_EQ(corpus.cohort("qwen/CoT").messages[0].source, "qwen/CoT");
  EXPECT_FALSE(corpus.cohort("2014").messages[0].source);
}

TEST(Ingest, CsvQuotingAndErrors) {
  const std::string text =
      "id,year,text,source\n"
      "a,2012,\"hello, world\",\n"
      "b,2013,\"she said \"\"ok lah\"\"\nnext line\",x\n";
  const auto corpus = ingest_csv(text);
  EXPECT_EQ(corpus.cohort("2012").messages[0].text, "hello, world");
  EXPECT_EQ(corpus.cohort("2013").messages[0].text, "she said \"ok lah\"\nnext line");
  EXPECT_EQ(corpus.cohort("2013").messages[0].source, "x");

  const auto msg = error_of([] { ingest_csv("id,year,text\na,2012,x\nb,2013\n"); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_THROW(ingest_csv("id,text\na,x\n"), DataError);
}

TEST(Ingest, RoundTripIdentity) {
  testkit::SyntheticSpec spec;
  spec.per_cohort = 30;
  auto corpus = testkit::synthetic_corpus(spec);
  std::vector<Message> extra{{"g1", "mistral/DD", "wah \"quoted\", comma\nnewline", std::string("mistral/DD")},
                             {"g2", "mistral/DD", "", std::nullopt}};
  for (const auto& c : corpus.cohorts()) extra.insert(extra.end(), c.messages.begin(), c.messages.end());
  corpus = Corpus::from_messages(extra);

  EXPECT_EQ(ingest_jsonl(to_jsonl(corpus)), corpus);
  EXPECT_EQ(ingest_csv(to_csv(corpus)), corpus);

  const auto dir = std::filesystem::temp_directory_path() / "diastyle_corpus_rt";
  std::filesystem::create_directories(dir);
  write_corpus(corpus, dir / "c.jsonl", CorpusFormat::jsonl);
  write_corpus(corpus, dir / "c.csv", CorpusFormat::csv);
  EXPECT_EQ(ingest(dir / "c.jsonl", format_for(dir / "c.jsonl")), corpus);
  EXPECT_EQ(ingest(dir / "c.csv", format_for(dir / "c.csv")), corpus);
  std::filesystem::remove_all(dir);
}

TEST(Corpus, DropSmallCohorts) {
  auto corpus = ingest_jsonl(
      "{\"id\":\"a\",\"year\":2012,\"text\":\"x\"}\n{\"id\":\"b\",\"year\":2012,\"text\":\"x\"}\n"
      "{\"id\":\"c\",\"year\":2022,\"text\":\"x\"}\n");
  EXPECT_EQ(corpus.drop_small_cohorts(2), (std::vector<std::string>{"2022"}));
  EXPECT_EQ(corpus.labels(), (std::vector<std::string>{"2012"}));
}

TEST(Embeddings, DimensionAndHeader) {
  std::string v384;
  for (int i = 0; i < 384; ++i) v384 += (i ? "," : "") + std::to_string(i * 0.001);
  const std::string text = "# encoder: all-MiniLM-L6-v2\n{\"id\":\"a\",\"vector\":[" + v384 +
                           "]}\n\n{\"id\":\"b\",\"vector\":[" + v384 + "]}\n";
  const auto set = parse_embeddings(text);
  EXPECT_EQ(set.dim, 384u);
  EXPECT_EQ(set.size(), 2u);
  ASSERT_NE(set.find("b"), nullptr);
  EXPECT_DOUBLE_EQ((*set.find("b"))[2], 0.002);
  EXPECT_EQ(set.find("zz"), nullptr);
  EXPECT_EQ(parse_embeddings(to_jsonl(set)).vectors, set.vectors);
}

TEST(Embeddings, ContractErrors) {
  EXPECT_NE(error_of([] { parse_embeddings("{\"id\":\"a\",\"vector\":[1,2,3]}\n{\"id\":\"b\",\"vector\":[1,2,3,4]}\n"); })
                .find("ragged"),
            std::string::npos);
  const auto nan = error_of([] { parse_embeddings("{\"id\":\"m7\",\"vector\":[1,NaN,3]}\n"); });
  EXPECT_NE(nan.find("m7"), std::string::npos) << nan;
  const auto str = error_of([] { parse_embeddings("{\"id\":\"m8\",\"vector\":[1,\"inf\",3]}\n"); });
  EXPECT_NE(str.find("m8"), std::string::npos) << str;
  EXPECT_THROW(parse_embeddings(""), DataError);
  EXPECT_THROW(parse_embeddings("# only a header\n"), DataError);
  EXPECT_THROW(parse_embeddings("{\"id\":\"a\",\"vector\":[1]}\n{\"id\":\"a\",\"vector\":[2]}\n"), DataError);
}

TEST(Embeddings, JoinReportsUnmatched) {
  const auto corpus = ingest_jsonl(
      "{\"id\":\"a\",\"year\":2012,\"text\":\"x\"}\n{\"id\":\"b\",\"year\":2012,\"text\":\"x\"}\n");
  const auto set = parse_embeddings("{\"id\":\"a\",\"vector\":[1]}\n{\"id\":\"z\",\"vector\":[2]}\n");
  const auto report = join(corpus, set);
  EXPECT_EQ(report.matched, 1u);
  EXPECT_EQ(report.messages_without_vector, (std::vector<std::string>{"b"}));
  EXPECT_EQ(report.vectors_without_message, (std::vector<std::string>{"z"}));
}

namespace {

Cohort make_cohort(const std::string& label, std::size_t n) {
  Cohort c{label, {}};
  for (std::size_t i = 0; i < n; ++i) c.messages.push_back({label + "-" + std::to_string(i), label, "x", std::nullopt});
  return c;
}

}  // namespace

TEST(Split, SizesAndDeterminism) {
  const auto a = make_cohort("A", 100);
  const auto b = make_cohort("B", 100);
  const auto s1 = split(a, b, 0.8, 7);
  const auto s2 = split(a, b, 0.8, 7);
  EXPECT_EQ(s1.train.size(), 160u);
  EXPECT_EQ(s1.test.size(), 40u);
  ASSERT_EQ(s1.train.size(), s2.train.size());
  for (std::size_t i = 0; i < s1.train.size(); ++i) EXPECT_EQ(s1.train[i].message, s2.train[i].message);
  const auto s3 = split(a, b, 0.8, 8);
  bool differs = false;
  for (std::size_t i = 0; i < s1.train.size(); ++i) differs |= s1.train[i].message != s3.train[i].message;
  EXPECT_TRUE(differs);

  std::set<const Message*> all;
  for (const auto& r : s1.train) all.insert(r.message);
  for (const auto& r : s1.test) all.insert(r.message);
  EXPECT_EQ(all.size(), 200u);
}

TEST(Split, RoundHalfUp) {
  EXPECT_EQ(train_size(0.8, 200), 160u);
  EXPECT_EQ(train_size(0.5, 5), 3u);   // 2.5 -> 3
  EXPECT_EQ(train_size(0.25, 6), 2u);  // 1.5 -> 2
  EXPECT_EQ(train_size(0.3, 5), 2u);   // 1.5 -> 2
  EXPECT_EQ(train_size(0.7, 3), 2u);   // 2.1 -> 2
}

TEST(Split, TenPlusTenEnumeratedSeeds) {
  // 16/4 split of 20 rows; the test side is missing a class with
  // probability 2 * C(10,4) / C(20,4) ~ 8.7%, so the seed sweep must see
  // both outcomes and every successful split must hold both labels.
  const auto a = make_cohort("A", 10);
  const auto b = make_cohort("B", 10);
  std::size_t ok = 0, rejected = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    try {
      const auto s = split(a, b, 0.8, seed);
      ASSERT_EQ(s.train.size(), 16u);
      ASSERT_EQ(s.test.size(), 4u);
      int test_classes = 0, train_classes = 0;
      for (int cls : {0, 1}) {
        test_classes += std::any_of(s.test.begin(), s.test.end(), [&](auto& r) { return r.cohort == cls; });
        train_classes += std::any_of(s.train.begin(), s.train.end(), [&](auto& r) { return r.cohort == cls; });
      }
      EXPECT_EQ(test_classes, 2);
      EXPECT_EQ(train_classes, 2);
      ++ok;
    } catch (const DataError&) {
      ++rejected;
    }
  }
  EXPECT_GT(ok, 300u);
  EXPECT_GT(rejected, 10u);
  EXPECT_LT(rejected, 70u);
}

TEST(Split, Preconditions) {
  const auto a = make_cohort("A", 10);
  const auto b = make_cohort("B", 10);
  const auto empty = make_cohort("E", 0);
  EXPECT_THROW(split(a, b, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(split(a, b, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(split(a, empty, 0.5, 1), std::invalid_argument);
  EXPECT_THROW(split(make_cohort("A", 1), make_cohort("B", 1), 0.5, 1), DataError);
}

TEST(Csv, ParseAndEscape) {
  const auto rows = csv::parse("a,b\r\n\"x,y\",\"q\"\"q\"\n\n3,4");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].fields, (std::vector<std::string>{"x,y", "q\"q"}));
  EXPECT_EQ(rows[2].line, 4u);
  EXPECT_EQ(csv::escape("plain"), "plain");
  EXPECT_EQ(csv::escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::escape("a\"b"), "\"a\"\"b\"");
  EXPECT_THROW(csv::parse("\"open"), DataError);
  EXPECT_THROW(csv::parse("\"a\"b,c"), DataError);
}

TEST(Io, NumberFormats) {
  EXPECT_EQ(io::format_roundtrip(0.1), "0.1");
  EXPECT_EQ(io::format_roundtrip(1.0), "1");
  EXPECT_EQ(std::stod(io::format_roundtrip(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(io::format_sig(0.123456789, 6), "0.123457");
}
