#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "diastyle/corpus.hpp"
#include "diastyle/feature_matrix.hpp"

namespace diastyle {

struct FeatureConfig {
  std::vector<std::string> particles;  // matched case-folded, after punctuation stripping
  std::vector<std::string> emoticons;  // matched verbatim against whole tokens

  // lah, lor, leh, liao, hor, meh, mah, sia + the shipped emoticon list.
  static FeatureConfig defaults();
};

// Version-1 emoticon list (identical to data/emoticons.txt).
const std::vector<std::string>& default_emoticons();
const std::vector<std::string>& default_particles();

// One pattern per line, '#' comments and blank lines ignored.
std::vector<std::string> load_emoticons(const std::filesystem::path& path);
std::vector<std::string> parse_emoticons(std::string_view content);

struct HandcraftedVector {
  std::size_t length_char = 0;
  std::size_t length_word = 0;
  double avg_word_len = 0.0;
  std::size_t num_repeated_char_words = 0;
  std::size_t reduplication = 0;
  std::vector<bool> has_particle;  // parallel to FeatureConfig::particles
  bool has_emoji = false;
  std::size_t num_emoticons = 0;

  // Values in `handcrafted_columns` order; flags as 0/1.
  std::vector<double> values() const;
};

// length_char, length_word, avg_word_len, num_repeated_char_words,
// reduplication, has_<particle>..., has_emoji, num_emoticons
std::vector<std::string> handcrafted_columns(const FeatureConfig& config);
inline constexpr std::size_t kFixedHandcraftedColumns = 7;

HandcraftedVector extract(std::string_view text, const FeatureConfig& config);
inline HandcraftedVector extract(const Message& m, const FeatureConfig& config) {
  return extract(m.text, config);
}

// True if the token holds at least three identical consecutive letters.
bool has_letter_run(std::string_view token, std::size_t run = 3);

struct ParticleProfile {
  std::string label;
  std::vector<std::string> particles;
  std::vector<double> per_1000;  // parallel to particles
  double combined = 0.0;
  std::size_t total_words = 0;
};

// Occurrences per 1000 whitespace tokens. Throws DataError on a cohort
// without words.
ParticleProfile particle_frequencies(const Cohort& cohort, const std::vector<std::string>& particles);

// One row per message, cohorts in corpus order.
FeatureMatrix featurize(const Corpus& corpus, const FeatureConfig& config, std::size_t threads = 0);

}  // namespace diastyle
