#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "diastyle/corpus.hpp"

namespace diastyle {

// Word-category dictionary. Entries are case-folded literals ("good") or
// prefix patterns with a single trailing wildcard ("nice*").
class Lexicon {
 public:
  Lexicon() = default;

  // Validates names and patterns; throws DataError on duplicate category
  // names, empty entries or a wildcard anywhere but the end.
  static Lexicon from_categories(std::vector<std::pair<std::string, std::vector<std::string>>> categories);

  const std::vector<std::string>& categories() const { return names_; }
  const std::vector<std::string>& entries(std::size_t category) const { return entries_[category]; }
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }

  // Indices of categories with an entry matching the (already folded) token.
  std::vector<std::size_t> match(std::string_view folded_token) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> entries_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> literals_;
  std::vector<std::pair<std::string, std::size_t>> prefixes_;
};

// Classic two-section .dic layout:
//   %
//   1<TAB>posemo
//   %
//   good<TAB>1
//   nice*<TAB>1[,2...]
Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(std::string_view content);

// User-supplied linear combination over category percentages (and "WPS").
struct SummaryVariable {
  std::string name;
  double intercept = 0.0;
  std::vector<std::pair<std::string, double>> weights;
};

// JSON: {"Clout": {"we": 1.5, "i": -2.0, "intercept": 40}, ...}
std::vector<SummaryVariable> parse_summary_config(std::string_view json_text);
std::vector<SummaryVariable> load_summary_config(const std::filesystem::path& path);

struct YearlyLexProfile {
  std::string label;
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::vector<std::pair<std::string, double>> percentages;  // lexicon category order
  double wps = 0.0;
  std::vector<std::pair<std::string, double>> summary;

  // percentages..., WPS, summary... as one ordered feature list
  std::vector<std::pair<std::string, double>> features() const;
};

// Sentence segments: text split on runs of '.', '?', '!' or newline, keeping
// segments with at least one non-whitespace character. A message with words
// but no such segment counts as one sentence.
std::size_t count_sentences(std::string_view text);

YearlyLexProfile profile_year(const Cohort& cohort, const Lexicon& lexicon,
                              const std::vector<SummaryVariable>& summary = {});

struct PcaRanking {
  std::string category;
  std::vector<std::string> features;      // ranked, at most k
  std::vector<double> abs_loadings;       // parallel to features
  std::vector<std::string> dropped;       // zero-variance features
};

// Ranks names by |loading| descending, ties by name.
std::vector<std::size_t> rank_by_abs_loading(const std::vector<std::string>& names,
                                             const std::vector<double>& loadings);

// First principal component of the correlation matrix of the columns of
// `rows` (years x features). Columns must have nonzero variance.
std::vector<double> first_principal_loadings(const std::vector<std::vector<double>>& rows);

// Per category (sorted by name): z-score over years, PCA, top-k features by
// |PC1 loading|. Features without a category are ignored.
std::vector<PcaRanking> pca_top_features(const std::vector<std::string>& feature_names,
                                         const std::vector<std::vector<double>>& year_rows,
                                         const std::map<std::string, std::string>& category_of,
                                         std::size_t k);

}  // namespace diastyle
