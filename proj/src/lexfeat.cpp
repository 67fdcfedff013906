#include "diastyle/lexfeat.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <unordered_map>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "diastyle/csv.hpp"
#include "diastyle/error.hpp"
#include "diastyle/unicode_text.hpp"

namespace diastyle {

Lexicon Lexicon::from_categories(std::vector<std::pair<std::string, std::vector<std::string>>> categories) {
  Lexicon lex;
  std::set<std::string> seen;
  for (auto& [name, entries] : categories) {
    if (name.empty()) throw DataError("lexicon category with empty name");
    if (!seen.insert(name).second) throw DataError("duplicate lexicon category '" + name + "'");
    const std::size_t index = lex.names_.size();
    lex.names_.push_back(name);
    std::vector<std::string> folded;
    for (const auto& raw : entries) {
      if (raw.empty() || raw == "*") throw DataError("empty entry in lexicon category '" + name + "'");
      const auto star = raw.find('*');
      if (star != std::string::npos && star != raw.size() - 1) {
        throw DataError("entry '" + raw + "' in category '" + name + "': wildcard must be the last character");
      }
      auto entry = text::fold_case(raw);
      folded.push_back(entry);
      if (entry.back() == '*') {
        lex.prefixes_.emplace_back(entry.substr(0, entry.size() - 1), index);
      } else {
        lex.literals_[entry].push_back(index);
      }
    }
    lex.entries_.push_back(std::move(folded));
  }
  return lex;
}

std::vector<std::size_t> Lexicon::match(std::string_view token) const {
  std::vector<std::size_t> hits;
  if (token.empty()) return hits;
  if (auto it = literals_.find(token); it != literals_.end()) hits = it->second;
  for (const auto& [prefix, category] : prefixes_) {
    if (token.starts_with(prefix)) hits.push_back(category);
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return hits;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_any(std::string_view s, std::string_view delims) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && delims.find(s[i]) != std::string_view::npos) ++i;
    const auto start = i;
    while (i < s.size() && delims.find(s[i]) == std::string_view::npos) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace

Lexicon parse_lexicon(std::string_view content) {
  enum class Section { before, categories, words } section = Section::before;
  std::vector<std::pair<std::string, std::vector<std::string>>> categories;
  std::map<std::string, std::size_t> by_id;
  std::set<std::string> words;
  std::size_t line_no = 0;
  std::size_t start = 0;

  while (start <= content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    const auto line = trim(content.substr(start, end - start));
    ++line_no;
    start = end + 1;
    const auto where = "dictionary line " + std::to_string(line_no) + ": ";

    if (line.empty()) {
      if (end == content.size()) break;
      continue;
    }
    if (line == "%") {
      if (section == Section::words) throw DataError(where + "unexpected third '%' delimiter");
      section = section == Section::before ? Section::categories : Section::words;
    } else if (section == Section::before) {
      throw DataError(where + "expected '%' before category declarations");
    } else if (section == Section::categories) {
      const auto parts = split_any(line, " \t");
      if (parts.size() != 2) throw DataError(where + "expected 'id<TAB>name'");
      if (by_id.contains(parts[0])) throw DataError(where + "duplicate category id '" + parts[0] + "'");
      by_id[parts[0]] = categories.size();
      categories.push_back({parts[1], {}});
    } else {
      const auto tab = line.find_first_of(" \t");
      if (tab == std::string_view::npos) throw DataError(where + "word row without category ids");
      const std::string word(line.substr(0, tab));
      if (!words.insert(text::fold_case(word)).second) throw DataError(where + "duplicate word entry '" + word + "'");
      const auto ids = split_any(line.substr(tab), " \t,");
      if (ids.empty()) throw DataError(where + "word row without category ids");
      for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError(where + "word '" + word + "' cites undeclared category id '" + id + "'");
        categories[it->second].second.push_back(word);
      }
    }
    if (end == content.size()) break;
  }
  if (section == Section::before) throw DataError("dictionary has no '%' delimited category section");
  if (section == Section::categories) throw DataError("dictionary category section is not closed by '%'");
  try {
    return Lexicon::from_categories(std::move(categories));
  } catch (const DataError& e) {
    throw DataError(std::string("dictionary: ") + e.what());
  }
}

Lexicon load_lexicon(const std::filesystem::path& path) { return parse_lexicon(io::read_file(path)); }

std::vector<SummaryVariable> parse_summary_config(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("summary config: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("summary config must be a JSON object");
  std::vector<SummaryVariable> out;
  for (const auto& [name, body] : doc.items()) {
    if (!body.is_object()) throw DataError("summary variable '" + name + "' must map to an object");
    SummaryVariable var;
    var.name = name;
    for (const auto& [key, weight] : body.items()) {
      if (!weight.is_number()) throw DataError("summary variable '" + name + "': weight for '" + key + "' is not a number");
      if (key == "intercept") var.intercept = weight.get<double>();
      else var.weights.emplace_back(key, weight.get<double>());
    }
    out.push_back(std::move(var));
  }
  return out;
}

std::vector<SummaryVariable> load_summary_config(const std::filesystem::path& path) {
  return parse_summary_config(io::read_file(path));
}

std::vector<std::pair<std::string, double>> YearlyLexProfile::features() const {
  auto out = percentages;
  out.emplace_back("WPS", wps);
  out.insert(out.end(), summary.begin(), summary.end());
  return out;
}

std::size_t count_sentences(std::string_view raw) {
  std::size_t sentences = 0;
  bool segment_has_content = false;
  for (char32_t c : text::decode(raw)) {
    if (c == U'.' || c == U'?' || c == U'!' || c == U'\n') {
      if (segment_has_content) ++sentences;
      segment_has_content = false;
    } else if (!text::is_white_space(c)) {
      segment_has_content = true;
    }
  }
  if (segment_has_content) ++sentences;
  return sentences;
}

YearlyLexProfile profile_year(const Cohort& cohort, const Lexicon& lexicon,
                              const std::vector<SummaryVariable>& summary) {
  YearlyLexProfile profile;
  profile.label = cohort.label;
  std::vector<std::size_t> hits(lexicon.size(), 0);
  std::unordered_map<std::string, std::vector<std::size_t>> cache;

  for (const auto& m : cohort.messages) {
    const auto tokens = text::tokenize(m.text);
    profile.words += tokens.size();
    const auto s = count_sentences(m.text);
    profile.sentences += (s == 0 && !tokens.empty()) ? 1 : s;
    if (lexicon.empty()) continue;
    for (const auto& t : tokens) {
      auto it = cache.find(t.key);
      if (it == cache.end()) it = cache.emplace(t.key, lexicon.match(t.key)).first;
      for (auto c : it->second) ++hits[c];
    }
  }
  if (profile.words == 0) {
    throw DataError("cohort '" + cohort.label + "' has no words; lexicon profile is undefined");
  }
  for (std::size_t c = 0; c < lexicon.size(); ++c) {
    profile.percentages.emplace_back(lexicon.categories()[c],
                                     100.0 * static_cast<double>(hits[c]) / static_cast<double>(profile.words));
  }
  profile.wps = static_cast<double>(profile.words) / static_cast<double>(profile.sentences);

  for (const auto& var : summary) {
    double value = var.intercept;
    for (const auto& [key, weight] : var.weights) {
      if (key == "WPS") {
        value += weight * profile.wps;
        continue;
      }
      auto it = std::find_if(profile.percentages.begin(), profile.percentages.end(),
                             [&](const auto& p) { return p.first == key; });
      if (it == profile.percentages.end()) {
        throw DataError("summary variable '" + var.name + "' references unknown category '" + key + "'");
      }
      value += weight * it->second;
    }
    profile.summary.emplace_back(var.name, value);
  }
  return profile;
}

std::vector<std::size_t> rank_by_abs_loading(const std::vector<std::string>& names,
                                             const std::vector<double>& loadings) {
  std::vector<std::size_t> order(names.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double la = std::abs(loadings[a]);
    const double lb = std::abs(loadings[b]);
    if (la != lb) return la > lb;
    return names[a] < names[b];
  });
  return order;
}

namespace {

double column_mean(const std::vector<std::vector<double>>& rows, std::size_t c) {
  double s = 0.0;
  for (const auto& r : rows) s += r[c];
  return s / static_cast<double>(rows.size());
}

double column_sd(const std::vector<std::vector<double>>& rows, std::size_t c, double mean) {
  double ss = 0.0;
  for (const auto& r : rows) ss += (r[c] - mean) * (r[c] - mean);
  return std::sqrt(ss / static_cast<double>(rows.size() - 1));
}

}  // namespace

std::vector<double> first_principal_loadings(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) throw DataError("PCA needs at least two observations");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd z(n, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    const double mean = column_mean(rows, static_cast<std::size_t>(c));
    const double sd = column_sd(rows, static_cast<std::size_t>(c), mean);
    if (!(sd > 0.0)) throw DataError("PCA column has zero variance");
    for (Eigen::Index r = 0; r < n; ++r) z(r, c) = (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] - mean) / sd;
  }
  const Eigen::MatrixXd corr = (z.transpose() * z) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  if (solver.info() != Eigen::Success) throw DataError("eigen-decomposition failed");
  // Eigenvalues are ascending; the last column is PC1.
  const Eigen::VectorXd pc1 = solver.eigenvectors().col(p - 1);
  return {pc1.data(), pc1.data() + p};
}

std::vector<PcaRanking> pca_top_features(const std::vector<std::string>& feature_names,
                                         const std::vector<std::vector<double>>& year_rows,
                                         const std::map<std::string, std::string>& category_of,
                                         std::size_t k) {
  if (year_rows.size() < 3) throw DataError("PCA over years needs at least 3 years");
  for (const auto& r : year_rows) {
    if (r.size() != feature_names.size()) throw DataError("year row width does not match feature names");
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t f = 0; f < feature_names.size(); ++f) {
    if (auto it = category_of.find(feature_names[f]); it != category_of.end()) groups[it->second].push_back(f);
  }

  std::vector<PcaRanking> out;
  for (const auto& [category, members] : groups) {
    PcaRanking ranking;
    ranking.category = category;
    std::vector<std::size_t> kept;
    for (auto f : members) {
      const double mean = column_mean(year_rows, f);
      if (column_sd(year_rows, f, mean) > 0.0) {
        kept.push_back(f);
      } else {
        ranking.dropped.push_back(feature_names[f]);
        std::cerr << "warning: dropping constant feature '" << feature_names[f] << "' from PCA category '"
                  << category << "'\n";
      }
    }
    if (kept.empty()) throw DataError("PCA category '" + category + "' has only constant features");

    std::vector<std::vector<double>> sub(year_rows.size(), std::vector<double>(kept.size()));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      names.push_back(feature_names[kept[j]]);
      for (std::size_t r = 0; r < year_rows.size(); ++r) sub[r][j] = year_rows[r][kept[j]];
    }
    const auto loadings = first_principal_loadings(sub);
    const auto order = rank_by_abs_loading(names, loadings);
    for (std::size_t i = 0; i < order.size() && i < k; ++i) {
      ranking.features.push_back(names[order[i]]);
      ranking.abs_loadings.push_back(std::abs(loadings[order[i]]));
    }
    out.push_back(std::move(ranking));
  }
  return out;
}

}  // namespace diastyle
