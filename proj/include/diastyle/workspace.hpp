#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace diastyle {

// Artifact layout of a workspace directory:
//   manifest.json              tool/format version, last config hash and seed, per-artifact provenance
//   corpus.jsonl               ingested corpus
//   features.csv               handcrafted feature matrix
//   embeddings.jsonl           imported message embeddings
//   lexicon_profiles.json/csv  yearly lexicon profiles
//   reports/                   JSON and CSV reports
//   logs/                      archived endpoint traffic
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path manifest_path() const { return root_ / "manifest.json"; }
  std::filesystem::path corpus_path() const { return root_ / "corpus.jsonl"; }
  std::filesystem::path features_path() const { return root_ / "features.csv"; }
  std::filesystem::path embeddings_path() const { return root_ / "embeddings.jsonl"; }
  std::filesystem::path lex_profiles_path() const { return root_ / "lexicon_profiles.json"; }
  std::filesystem::path lex_profiles_csv_path() const { return root_ / "lexicon_profiles.csv"; }
  std::filesystem::path reports_dir() const { return root_ / "reports"; }
  std::filesystem::path logs_dir() const { return root_ / "logs"; }
  std::filesystem::path lock_path() const { return root_ / ".lock"; }

  // Throws DataError naming the artifact and the command that produces it.
  std::filesystem::path require(const std::filesystem::path& artifact, std::string_view producer) const;

  // Records provenance for an artifact (path relative to the root) and
  // rewrites the manifest atomically.
  void record(const std::string& artifact, const std::string& command, const std::string& config_hash,
              std::uint64_t seed);

 private:
  std::filesystem::path root_;
};

// Exclusive lock held for the lifetime of the object. Throws DataError when
// the lock file already exists.
class WorkspaceLock {
 public:
  explicit WorkspaceLock(const Workspace& ws);
  ~WorkspaceLock();
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  std::filesystem::path path_;
};

// File-name-safe form of a cohort label ("mistral/DD" -> "mistral_DD").
std::string safe_name(std::string_view label);

// 64-bit FNV-1a of the text as 16 hex digits.
std::string hash_hex(std::string_view text);

}  // namespace diastyle
