#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace diastyle {

struct Message {
  std::string id;
  std::string label;  // year ("2014") or free tag ("mistral/DD")
  std::string text;
  std::optional<std::string> source;

  bool operator==(const Message&) const = default;
};

struct Cohort {
  std::string label;
  std::vector<Message> messages;

  bool operator==(const Cohort&) const = default;
};

// Parses a label as a whole-number year. Leading '+', whitespace or
// fractional parts disqualify it.
std::optional<long> numeric_label(std::string_view label);

// Numeric labels sort numerically and before any non-numeric label; the
// rest sort bytewise.
bool label_less(std::string_view a, std::string_view b);

class Corpus {
 public:
  Corpus() = default;

  // Partitions messages by label; cohort order follows `label_less`,
  // message order within a cohort follows input order. Throws DataError on
  // duplicate ids.
  static Corpus from_messages(std::vector<Message> messages);

  const std::vector<Cohort>& cohorts() const { return cohorts_; }
  const Cohort& cohort(std::string_view label) const;
  const Cohort* find(std::string_view label) const;
  std::size_t message_count() const;
  std::vector<std::string> labels() const;

  // Drops cohorts with fewer than `min_size` messages and returns their labels.
  std::vector<std::string> drop_small_cohorts(std::size_t min_size);

  bool operator==(const Corpus&) const = default;

 private:
  std::vector<Cohort> cohorts_;
};

enum class CorpusFormat { jsonl, csv };

struct IngestReport {
  std::size_t records = 0;
  std::map<std::string, std::size_t> per_cohort;
};

// Reads a corpus file. Errors carry the 1-based line number of the
// offending record.
Corpus ingest(const std::filesystem::path& path, CorpusFormat format,
              IngestReport* report = nullptr);
Corpus ingest_jsonl(std::string_view content, IngestReport* report = nullptr);
Corpus ingest_csv(std::string_view content, IngestReport* report = nullptr);

// Guesses the format from the file extension (.csv, otherwise jsonl).
CorpusFormat format_for(const std::filesystem::path& path);

std::string to_jsonl(const Corpus& corpus);
std::string to_csv(const Corpus& corpus);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format);

struct EmbeddingSet {
  std::size_t dim = 0;
  std::vector<std::string> ids;              // file order
  std::vector<std::vector<double>> vectors;  // parallel to ids

  const std::vector<double>* find(std::string_view id) const;
  std::size_t size() const { return ids.size(); }

 private:
  friend EmbeddingSet parse_embeddings(std::string_view content);
  std::unordered_map<std::string, std::size_t> index_;
};

// JSONL records {"id": ..., "vector": [...]}. Blank lines and lines starting
// with '#' are skipped. Throws DataError on ragged lengths, non-finite
// entries, duplicate ids or an empty file.
EmbeddingSet import_embeddings(const std::filesystem::path& path);
EmbeddingSet parse_embeddings(std::string_view content);
std::string to_jsonl(const EmbeddingSet& embeddings);

struct JoinReport {
  std::size_t matched = 0;
  std::vector<std::string> messages_without_vector;
  std::vector<std::string> vectors_without_message;
};

JoinReport join(const Corpus& corpus, const EmbeddingSet& embeddings);

// One labelled row of a two-cohort problem; `cohort` is 0 or 1.
struct LabeledRef {
  const Message* message = nullptr;
  int cohort = 0;
};

struct Split {
  std::vector<LabeledRef> train;
  std::vector<LabeledRef> test;
};

// Positions into the concatenation first ++ second, each ascending.
struct SplitAssignment {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Shuffles positions 0..n_first+n_second-1 with SplitMix64(seed) and puts
// the first train_size(...) of them in train. Same preconditions and errors
// as `split`.
SplitAssignment split_indices(std::size_t n_first, std::size_t n_second, double train_fraction,
                              std::uint64_t seed);

// round-half-up of fraction * n.
std::size_t train_size(double train_fraction, std::size_t n);

// Random train/test assignment over the concatenation first ++ second.
// Train/test keep concatenation order. Throws std::invalid_argument when
// the fraction is outside (0, 1) or a cohort is empty, DataError when a
// class would be missing from either side.
Split split(std::span<const Message> first, std::span<const Message> second,
            double train_fraction, std::uint64_t seed);
Split split(const Cohort& first, const Cohort& second, double train_fraction,
            std::uint64_t seed);

}  // namespace diastyle
