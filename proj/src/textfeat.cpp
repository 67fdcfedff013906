#include "diastyle/textfeat.hpp"

#include <stdexcept>

#include "diastyle/csv.hpp"
#include "diastyle/error.hpp"
#include "diastyle/parallel.hpp"
#include "diastyle/unicode_text.hpp"

namespace diastyle {

const std::vector<std::string>& default_particles() {
  static const std::vector<std::string> particles{"lah", "lor", "leh", "liao",
                                                  "hor", "meh", "mah", "sia"};
  return particles;
}

const std::vector<std::string>& default_emoticons() {
  static const std::vector<std::string> emoticons{
      ":)", ":-)", ":(", ":-(", ":D", ":-D", ":P", ":-P", ":p", ":-p", ";)", ";-)", ";(",
      ";P", ";p", ";D", ":O", ":o", ":-O", ":-o", ":/", ":-/", ":|", ":-|", ":'(", ":3",
      ":*", ":-*", ":]", ":[", "<3", "</3", "xD", "XD", "xd", "xP", "XP", "=)", "=(", "=D",
      "=P", "^^", "^_^", "-_-", "T_T", ">.<", "o.O", "O.o", "B)", "8)", "D:"};
  return emoticons;
}

FeatureConfig FeatureConfig::defaults() { return {default_particles(), default_emoticons()}; }

std::vector<std::string> parse_emoticons(std::string_view content) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < content.size()) {
    ++line_no;
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    for (char32_t c : text::decode(line)) {
      if (text::is_white_space(c)) {
        throw DataError("emoticon list line " + std::to_string(line_no) + ": patterns may not contain whitespace");
      }
    }
    out.emplace_back(line);
  }
  return out;
}

std::vector<std::string> load_emoticons(const std::filesystem::path& path) {
  return parse_emoticons(io::read_file(path));
}

std::vector<std::string> handcrafted_columns(const FeatureConfig& config) {
  std::vector<std::string> cols{"length_char", "length_word", "avg_word_len",
                                "num_repeated_char_words", "reduplication"};
  for (const auto& p : config.particles) cols.push_back("has_" + p);
  cols.emplace_back("has_emoji");
  cols.emplace_back("num_emoticons");
  return cols;
}

std::vector<double> HandcraftedVector::values() const {
  std::vector<double> v{static_cast<double>(length_char), static_cast<double>(length_word),
                        avg_word_len, static_cast<double>(num_repeated_char_words),
                        static_cast<double>(reduplication)};
  for (bool flag : has_particle) v.push_back(flag ? 1.0 : 0.0);
  v.push_back(has_emoji ? 1.0 : 0.0);
  v.push_back(static_cast<double>(num_emoticons));
  return v;
}

bool has_letter_run(std::string_view token, std::size_t run) {
  const auto scalars = text::decode(token);
  std::size_t streak = 0;
  char32_t previous = 0;
  for (char32_t c : scalars) {
    if (text::is_letter(c) && c == previous) {
      if (++streak >= run) return true;
    } else {
      streak = text::is_letter(c) ? 1 : 0;
    }
    previous = c;
  }
  return false;
}

HandcraftedVector extract(std::string_view raw, const FeatureConfig& config) {
  if (config.particles.empty()) throw std::invalid_argument("feature config needs at least one particle");

  HandcraftedVector v;
  v.has_particle.assign(config.particles.size(), false);
  v.length_char = text::scalar_count(raw);

  const auto tokens = text::tokenize(raw);
  v.length_word = tokens.size();

  std::size_t token_chars = 0;
  const std::string* previous_key = nullptr;
  for (const auto& token : tokens) {
    const auto scalars = text::decode(token.text);
    token_chars += scalars.size();

    for (char32_t c : scalars) {
      if (text::is_extended_pictographic(c)) {
        v.has_emoji = true;
        break;
      }
    }
    if (has_letter_run(text::fold_case(token.text))) ++v.num_repeated_char_words;

    for (const auto& e : config.emoticons) {
      if (token.text == e) {
        ++v.num_emoticons;
        break;
      }
    }
    for (std::size_t p = 0; p < config.particles.size(); ++p) {
      if (token.key == config.particles[p]) v.has_particle[p] = true;
    }

    if (!token.key.empty() && previous_key && *previous_key == token.key) ++v.reduplication;
    previous_key = &token.key;
  }
  v.avg_word_len = v.length_word ? static_cast<double>(token_chars) / static_cast<double>(v.length_word) : 0.0;
  return v;
}

ParticleProfile particle_frequencies(const Cohort& cohort, const std::vector<std::string>& particles) {
  ParticleProfile profile;
  profile.label = cohort.label;
  profile.particles = particles;
  std::vector<std::size_t> counts(particles.size(), 0);
  for (const auto& m : cohort.messages) {
    const auto tokens = text::tokenize(m.text);
    profile.total_words += tokens.size();
    for (const auto& t : tokens) {
      for (std::size_t p = 0; p < particles.size(); ++p) {
        if (t.key == particles[p]) ++counts[p];
      }
    }
  }
  if (profile.total_words == 0) {
    throw DataError("cohort '" + cohort.label + "' has no words; particle frequencies are undefined");
  }
  const double scale = 1000.0 / static_cast<double>(profile.total_words);
  profile.per_1000.reserve(particles.size());
  for (std::size_t p = 0; p < particles.size(); ++p) {
    profile.per_1000.push_back(static_cast<double>(counts[p]) * scale);
    profile.combined += profile.per_1000.back();
  }
  return profile;
}

FeatureMatrix featurize(const Corpus& corpus, const FeatureConfig& config, std::size_t threads) {
  std::vector<const Message*> messages;
  for (const auto& c : corpus.cohorts()) {
    for (const auto& m : c.messages) messages.push_back(&m);
  }
  std::vector<std::vector<double>> rows(messages.size());
  parallel_for(messages.size(), threads, [&](std::size_t i) { rows[i] = extract(*messages[i], config).values(); });

  FeatureMatrix matrix(handcrafted_columns(config), FeatureKind::handcrafted);
  for (std::size_t i = 0; i < messages.size(); ++i) matrix.add_row(messages[i]->id, rows[i]);
  return matrix;
}

}  // namespace diastyle
