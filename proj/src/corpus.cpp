#include "diastyle/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <regex>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "diastyle/csv.hpp"
#include "diastyle/error.hpp"
#include "diastyle/rng.hpp"

namespace diastyle {

using nlohmann::json;

std::optional<long> numeric_label(std::string_view label) {
  if (label.empty()) return std::nullopt;
  long value = 0;
  auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), value);
  if (ec != std::errc() || ptr != label.data() + label.size()) return std::nullopt;
  return value;
}

bool label_less(std::string_view a, std::string_view b) {
  const auto na = numeric_label(a);
  const auto nb = numeric_label(b);
  if (na && nb) return *na != *nb ? *na < *nb : a < b;
  if (na) return true;
  if (nb) return false;
  return a < b;
}

Corpus Corpus::from_messages(std::vector<Message> messages) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::map<std::string, std::size_t> slot;
  for (auto& m : messages) {
    if (!seen.insert(m.id).second) throw DataError("duplicate message id '" + m.id + "'");
    auto it = slot.find(m.label);
    if (it == slot.end()) {
      it = slot.emplace(m.label, corpus.cohorts_.size()).first;
      corpus.cohorts_.push_back(Cohort{m.label, {}});
    }
    corpus.cohorts_[it->second].messages.push_back(std::move(m));
  }
  std::stable_sort(corpus.cohorts_.begin(), corpus.cohorts_.end(),
                   [](const Cohort& a, const Cohort& b) { return label_less(a.label, b.label); });
  return corpus;
}

const Cohort* Corpus::find(std::string_view label) const {
  for (const auto& c : cohorts_) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

const Cohort& Corpus::cohort(std::string_view label) const {
  if (const auto* c = find(label)) return *c;
  throw DataError("no cohort labelled '" + std::string(label) + "'");
}

std::size_t Corpus::message_count() const {
  std::size_t n = 0;
  for (const auto& c : cohorts_) n += c.messages.size();
  return n;
}

std::vector<std::string> Corpus::labels() const {
  std::vector<std::string> out;
  out.reserve(cohorts_.size());
  for (const auto& c : cohorts_) out.push_back(c.label);
  return out;
}

std::vector<std::string> Corpus::drop_small_cohorts(std::size_t min_size) {
  std::vector<std::string> dropped;
  std::erase_if(cohorts_, [&](const Cohort& c) {
    if (c.messages.size() >= min_size) return false;
    dropped.push_back(c.label);
    return true;
  });
  return dropped;
}

namespace {

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

void tally(IngestReport* report, const std::vector<Message>& messages) {
  if (!report) return;
  report->records = messages.size();
  report->per_cohort.clear();
  for (const auto& m : messages) ++report->per_cohort[m.label];
}

Message message_from_json(const json& record, std::size_t line) {
  if (!record.is_object()) throw DataError(line_prefix(line) + "record is not a JSON object");
  Message m;

  auto id = record.find("id");
  if (id == record.end()) throw DataError(line_prefix(line) + "missing required field 'id'");
  if (!id->is_string()) throw DataError(line_prefix(line) + "field 'id' must be a string");
  m.id = id->get<std::string>();

  auto year = record.find("year");
  auto tag = record.find("tag");
  if (year != record.end()) {
    if (!year->is_number_integer()) throw DataError(line_prefix(line) + "field 'year' must be an integer");
    m.label = std::to_string(year->get<long>());
  } else if (tag != record.end()) {
    if (!tag->is_string()) throw DataError(line_prefix(line) + "field 'tag' must be a string");
    m.label = tag->get<std::string>();
    if (m.label.empty()) throw DataError(line_prefix(line) + "field 'tag' is empty");
  } else {
    throw DataError(line_prefix(line) + "missing required field 'year' or 'tag'");
  }

  auto text = record.find("text");
  if (text == record.end()) throw DataError(line_prefix(line) + "missing required field 'text'");
  if (!text->is_string()) throw DataError(line_prefix(line) + "field 'text' must be a string");
  m.text = text->get<std::string>();

  auto source = record.find("source");
  if (source != record.end() && !source->is_null()) {
    if (!source->is_string()) throw DataError(line_prefix(line) + "field 'source' must be a string");
    m.source = source->get<std::string>();
  }
  return m;
}

template <typename Fn>
void for_each_line(std::string_view content, Fn&& fn) {
  std::size_t line = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    ++line;
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    auto text = content.substr(start, end - start);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    fn(text, line);
    if (end == content.size()) break;
    start = end + 1;
  }
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

Corpus ingest_jsonl(std::string_view content, IngestReport* report) {
  std::vector<Message> messages;
  std::unordered_set<std::string> seen;
  for_each_line(content, [&](std::string_view text, std::size_t line) {
    if (is_blank(text)) return;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DataError(line_prefix(line) + "malformed JSON (" + e.what() + ")");
    }
    auto m = message_from_json(record, line);
    if (!seen.insert(m.id).second) throw DataError(line_prefix(line) + "duplicate id '" + m.id + "'");
    messages.push_back(std::move(m));
  });
  tally(report, messages);
  return Corpus::from_messages(std::move(messages));
}

Corpus ingest_csv(std::string_view content, IngestReport* report) {
  const auto rows = csv::parse(content);
  if (rows.empty()) throw DataError("CSV corpus has no header row");
  const auto& header = rows.front().fields;
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto id_col = column("id");
  const auto year_col = column("year");
  const auto tag_col = column("tag");
  const auto text_col = column("text");
  const auto source_col = column("source");
  if (!id_col) throw DataError("line 1: header lacks required column 'id'");
  if (!year_col && !tag_col) throw DataError("line 1: header lacks required column 'year' or 'tag'");
  if (!text_col) throw DataError("line 1: header lacks required column 'text'");

  std::vector<Message> messages;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size()) {
      throw DataError(line_prefix(row.line) + "expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(row.fields.size()));
    }
    Message m;
    m.id = row.fields[*id_col];
    if (m.id.empty()) throw DataError(line_prefix(row.line) + "empty 'id'");
    if (year_col && !row.fields[*year_col].empty()) {
      const auto& y = row.fields[*year_col];
      if (!numeric_label(y)) throw DataError(line_prefix(row.line) + "field 'year' must be an integer");
      m.label = std::to_string(*numeric_label(y));
    } else if (tag_col && !row.fields[*tag_col].empty()) {
      m.label = row.fields[*tag_col];
    } else {
      throw DataError(line_prefix(row.line) + "missing required field 'year' or 'tag'");
    }
    m.text = row.fields[*text_col];
    if (source_col && !row.fields[*source_col].empty()) m.source = row.fields[*source_col];
    if (!seen.insert(m.id).second) throw DataError(line_prefix(row.line) + "duplicate id '" + m.id + "'");
    messages.push_back(std::move(m));
  }
  tally(report, messages);
  return Corpus::from_messages(std::move(messages));
}

CorpusFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
}

Corpus ingest(const std::filesystem::path& path, CorpusFormat format, IngestReport* report) {
  if (!std::filesystem::exists(path)) throw DataError("input file not found: " + path.string());
  const auto content = io::read_file(path);
  return format == CorpusFormat::csv ? ingest_csv(content, report) : ingest_jsonl(content, report);
}

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& cohort : corpus.cohorts()) {
    for (const auto& m : cohort.messages) {
      json record = json::object();
      record["id"] = m.id;
      if (auto year = numeric_label(m.label); year && std::to_string(*year) == m.label) {
        record["year"] = *year;
      } else {
        record["tag"] = m.label;
      }
      record["text"] = m.text;
      if (m.source) record["source"] = *m.source;
      out += record.dump(-1, ' ', false, json::error_handler_t::strict);
      out.push_back('\n');
    }
  }
  return out;
}

std::string to_csv(const Corpus& corpus) {
  bool all_years = true;
  bool any_source = false;
  for (const auto& cohort : corpus.cohorts()) {
    auto year = numeric_label(cohort.label);
    if (!year || std::to_string(*year) != cohort.label) all_years = false;
    for (const auto& m : cohort.messages) any_source = any_source || m.source.has_value();
  }
  std::vector<std::string> header{"id", all_years ? "year" : "tag", "text"};
  if (any_source) header.emplace_back("source");
  std::string out = csv::join(header) + "\n";
  for (const auto& cohort : corpus.cohorts()) {
    for (const auto& m : cohort.messages) {
      std::vector<std::string> fields{m.id, m.label, m.text};
      if (any_source) fields.push_back(m.source.value_or(""));
      out += csv::join(fields) + "\n";
    }
  }
  return out;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format) {
  io::write_file_atomic(path, format == CorpusFormat::csv ? to_csv(corpus) : to_jsonl(corpus));
}

// -- embeddings --------------------------------------------------------------

const std::vector<double>* EmbeddingSet::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &vectors[it->second];
}

EmbeddingSet parse_embeddings(std::string_view content) {
  static const std::regex id_pattern(R"re("id"\s*:\s*"((?:[^"\\]|\\.)*)")re");
  EmbeddingSet set;
  for_each_line(content, [&](std::string_view text, std::size_t line) {
    if (is_blank(text) || text.front() == '#') return;
    const std::string raw(text);
    json record;
    try {
      record = json::parse(raw);
    } catch (const json::parse_error&) {
      std::smatch match;
      if (std::regex_search(raw, match, id_pattern)) {
        throw DataError(line_prefix(line) + "vector for id '" + match[1].str() +
                        "' contains a non-finite or malformed entry");
      }
      throw DataError(line_prefix(line) + "malformed JSON record");
    }
    if (!record.is_object() || !record.contains("id") || !record["id"].is_string()) {
      throw DataError(line_prefix(line) + "missing string field 'id'");
    }
    const auto id = record["id"].get<std::string>();
    if (!record.contains("vector") || !record["vector"].is_array()) {
      throw DataError(line_prefix(line) + "record '" + id + "' lacks a 'vector' array");
    }
    std::vector<double> values;
    values.reserve(record["vector"].size());
    for (const auto& v : record["vector"]) {
      if (!v.is_number()) {
        throw DataError(line_prefix(line) + "vector for id '" + id + "' contains a non-finite or malformed entry");
      }
      const double x = v.get<double>();
      if (!std::isfinite(x)) {
        throw DataError(line_prefix(line) + "vector for id '" + id + "' contains a non-finite entry");
      }
      values.push_back(x);
    }
    if (values.empty()) throw DataError(line_prefix(line) + "vector for id '" + id + "' is empty");
    if (set.ids.empty()) {
      set.dim = values.size();
    } else if (values.size() != set.dim) {
      throw DataError(line_prefix(line) + "ragged vector length for id '" + id + "': " +
                      std::to_string(values.size()) + " entries, expected " + std::to_string(set.dim));
    }
    if (!set.index_.emplace(id, set.ids.size()).second) {
      throw DataError(line_prefix(line) + "duplicate embedding id '" + id + "'");
    }
    set.ids.push_back(id);
    set.vectors.push_back(std::move(values));
  });
  if (set.ids.empty()) throw DataError("embedding file contains no records");
  return set;
}

EmbeddingSet import_embeddings(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("embedding file not found: " + path.string());
  return parse_embeddings(io::read_file(path));
}

std::string to_jsonl(const EmbeddingSet& embeddings) {
  std::string out;
  for (std::size_t i = 0; i < embeddings.ids.size(); ++i) {
    out += "{\"id\":" + json(embeddings.ids[i]).dump() + ",\"vector\":[";
    const auto& v = embeddings.vectors[i];
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (j) out.push_back(',');
      out += io::format_roundtrip(v[j]);
    }
    out += "]}\n";
  }
  return out;
}

JoinReport join(const Corpus& corpus, const EmbeddingSet& embeddings) {
  JoinReport report;
  std::unordered_set<std::string> message_ids;
  for (const auto& cohort : corpus.cohorts()) {
    for (const auto& m : cohort.messages) {
      message_ids.insert(m.id);
      if (embeddings.find(m.id)) ++report.matched;
      else report.messages_without_vector.push_back(m.id);
    }
  }
  for (const auto& id : embeddings.ids) {
    if (!message_ids.contains(id)) report.vectors_without_message.push_back(id);
  }
  return report;
}

// -- splitting ---------------------------------------------------------------

std::size_t train_size(double train_fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 0.5));
}

SplitAssignment split_indices(std::size_t n_first, std::size_t n_second, double train_fraction,
                              std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie strictly between 0 and 1");
  }
  if (n_first == 0 || n_second == 0) throw std::invalid_argument("split needs two non-empty cohorts");

  const std::size_t n = n_first + n_second;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  SplitMix64 rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  const std::size_t n_train = train_size(train_fraction, n);
  std::vector<char> in_train(n, 0);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = 1;

  SplitAssignment out;
  out.train.reserve(n_train);
  out.test.reserve(n - n_train);
  std::size_t train_counts[2] = {0, 0};
  std::size_t test_counts[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = i < n_first ? 0 : 1;
    if (in_train[i]) {
      out.train.push_back(i);
      ++train_counts[cls];
    } else {
      out.test.push_back(i);
      ++test_counts[cls];
    }
  }
  if (!train_counts[0] || !train_counts[1] || !test_counts[0] || !test_counts[1]) {
    throw DataError("split leaves a class absent from the train or test partition (" +
                    std::to_string(n_first) + "+" + std::to_string(n_second) + " messages)");
  }
  return out;
}

Split split(std::span<const Message> first, std::span<const Message> second,
            double train_fraction, std::uint64_t seed) {
  const auto assignment = split_indices(first.size(), second.size(), train_fraction, seed);
  auto ref = [&](std::size_t i) -> LabeledRef {
    return i < first.size() ? LabeledRef{&first[i], 0} : LabeledRef{&second[i - first.size()], 1};
  };
  Split out;
  for (auto i : assignment.train) out.train.push_back(ref(i));
  for (auto i : assignment.test) out.test.push_back(ref(i));
  return out;
}

Split split(const Cohort& first, const Cohort& second, double train_fraction, std::uint64_t seed) {
  return split(std::span<const Message>(first.messages), std::span<const Message>(second.messages),
               train_fraction, seed);
}

}  // namespace diastyle
