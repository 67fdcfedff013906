#include "diastyle/reports.hpp"

#include <cmath>

#include "diastyle/csv.hpp"
#include "diastyle/error.hpp"

namespace diastyle::reports {

namespace {

void dump_value(const Json& v, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        dump_value(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump_value(v[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? io::format_sig(d, 17) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string csv_num(double v) { return io::format_sig(v, 6); }
std::string csv_opt(const std::optional<double>& v) { return v ? csv_num(*v) : std::string(); }

}  // namespace

std::string dump(const Json& doc) {
  std::string out;
  dump_value(doc, out, 0);
  out.push_back('\n');
  return out;
}

Json meta_json(const ReportMeta& meta) {
  Json j;
  j["tool_version"] = kToolVersion;
  j["format_version"] = kFormatVersion;
  j["command"] = meta.command;
  j["config_hash"] = meta.config_hash;
  j["seed"] = meta.seed;
  return j;
}

Json to_json(const experiment::PairResult& pair) {
  Json j;
  j["a"] = pair.label_a;
  j["b"] = pair.label_b;
  j["kind"] = std::string(to_string(pair.kind));
  j["rows_a"] = pair.rows_a;
  j["rows_b"] = pair.rows_b;
  j["run_accuracy"] = pair.run_accuracy;
  j["run_similarity"] = pair.run_similarity;
  j["mean_acc"] = pair.mean_acc;
  j["acc_std"] = pair.acc_std;
  j["similarity"] = pair.similarity;
  return j;
}

Json to_json(const experiment::GapCurve& curve, const ReportMeta& meta) {
  Json j;
  j["meta"] = meta_json(meta);
  j["kind"] = std::string(to_string(curve.kind));
  j["gaps"] = Json::array();
  for (const auto& p : curve.points) {
    Json g;
    g["T"] = p.gap;
    g["pairs"] = p.pairs;
    g["mean_S"] = p.mean_similarity;
    g["std"] = p.std_similarity;
    j["gaps"].push_back(g);
  }
  j["pairs"] = Json::array();
  for (const auto& p : curve.pairs) j["pairs"].push_back(to_json(p));
  return j;
}

Json to_json(const experiment::AlignmentProfile& profile, const ReportMeta& meta) {
  Json j;
  j["meta"] = meta_json(meta);
  j["cohort"] = profile.label;
  j["kind"] = std::string(to_string(profile.kind));
  j["per_year"] = Json::array();
  for (const auto& [year, s] : profile.per_year) j["per_year"].push_back(Json{{"year", year}, {"S", s}});
  j["mean"] = profile.mean;
  j["std"] = profile.std;
  if (profile.variance_test) {
    const auto& t = *profile.variance_test;
    Json v;
    v["n"] = t.n;
    v["sigma0"] = t.sigma0;
    v["chi2"] = t.chi2;
    v["p"] = t.p;
    v["alternative"] = t.alternative == stats::Alternative::less      ? "less"
                       : t.alternative == stats::Alternative::greater ? "greater"
                                                                      : "two-sided";
    j["variance_test"] = v;
  }
  j["pairs"] = Json::array();
  for (const auto& p : profile.pairs) j["pairs"].push_back(to_json(p));
  return j;
}

Json to_json(const experiment::ShapTrendReport& report, const ReportMeta& meta) {
  Json j;
  j["meta"] = meta_json(meta);
  j["unit"] = std::string(experiment::to_string(report.unit));
  j["features"] = Json::array();
  for (const auto& s : report.stats) {
    Json f;
    f["feature"] = s.feature;
    f["mean_shap"] = s.mean;
    f["std"] = s.std;
    f["t"] = optional_number(s.t);
    f["p"] = optional_number(s.p);
    f["significant"] = s.significant;
    j["features"].push_back(f);
  }
  j["by_gap"] = Json::array();
  for (const auto& [gap, values] : report.by_gap) j["by_gap"].push_back(Json{{"T", gap}, {"mean_abs_shap", values}});
  j["pairs"] = Json::array();
  for (const auto& p : report.pairs) {
    j["pairs"].push_back(Json{{"a", p.label_a}, {"b", p.label_b}, {"T", p.gap}, {"mean_abs_shap", p.mean_abs}});
  }
  return j;
}

Json to_json(const experiment::TrendReport& report, const std::vector<PcaRanking>& pca, const ReportMeta& meta) {
  Json j;
  j["meta"] = meta_json(meta);
  j["years"] = report.years;
  j["pca"] = Json::array();
  for (const auto& r : pca) {
    j["pca"].push_back(Json{{"category", r.category},
                            {"features", r.features},
                            {"abs_loadings", r.abs_loadings},
                            {"dropped", r.dropped}});
  }
  j["trends"] = Json::array();
  for (const auto& r : report.rows) {
    Json t;
    t["feature"] = r.feature;
    t["slope"] = r.slope;
    t["rho"] = optional_number(r.rho);
    t["p"] = optional_number(r.p);
    t["significant"] = r.significant;
    j["trends"].push_back(t);
  }
  return j;
}

Json to_json(const std::vector<YearlyLexProfile>& profiles, const ReportMeta& meta) {
  Json j;
  j["meta"] = meta_json(meta);
  j["profiles"] = Json::array();
  for (const auto& p : profiles) {
    Json e;
    e["label"] = p.label;
    e["words"] = p.words;
    e["sentences"] = p.sentences;
    Json cats = Json::object();
    for (const auto& [name, v] : p.percentages) cats[name] = v;
    e["percentages"] = cats;
    e["WPS"] = p.wps;
    Json summary = Json::object();
    for (const auto& [name, v] : p.summary) summary[name] = v;
    e["summary"] = summary;
    j["profiles"].push_back(e);
  }
  return j;
}

Json to_json(const std::vector<ParticleProfile>& profiles, const ReportMeta& meta) {
  Json j;
  j["meta"] = meta_json(meta);
  j["cohorts"] = Json::array();
  for (const auto& p : profiles) {
    Json e;
    e["label"] = p.label;
    e["total_words"] = p.total_words;
    Json per = Json::object();
    for (std::size_t i = 0; i < p.particles.size(); ++i) per[p.particles[i]] = p.per_1000[i];
    e["per_1000"] = per;
    e["combined"] = p.combined;
    j["cohorts"].push_back(e);
  }
  return j;
}

std::vector<YearlyLexProfile> lex_profiles_from_json(const std::string& text) {
  try {
    const auto doc = Json::parse(text);
    std::vector<YearlyLexProfile> out;
    for (const auto& e : doc.at("profiles")) {
      YearlyLexProfile p;
      p.label = e.at("label").get<std::string>();
      p.words = e.at("words").get<std::size_t>();
      p.sentences = e.at("sentences").get<std::size_t>();
      for (const auto& [k, v] : e.at("percentages").items()) p.percentages.emplace_back(k, v.get<double>());
      p.wps = e.at("WPS").get<double>();
      for (const auto& [k, v] : e.at("summary").items()) p.summary.emplace_back(k, v.get<double>());
      out.push_back(std::move(p));
    }
    return out;
  } catch (const Json::exception& e) {
    throw DataError(std::string("lexicon profile JSON: ") + e.what());
  }
}

std::string gap_curve_csv(const experiment::GapCurve& curve) {
  std::string out = "T,mean_S,std\n";
  for (const auto& p : curve.points) {
    out += std::to_string(p.gap) + "," + csv_num(p.mean_similarity) + "," + csv_num(p.std_similarity) + "\n";
  }
  return out;
}

std::string pairs_csv(const std::vector<experiment::PairResult>& pairs) {
  std::string out = "a,b,kind,mean_acc,acc_std,S\n";
  for (const auto& p : pairs) {
    out += csv::join({p.label_a, p.label_b, std::string(to_string(p.kind))}) + "," + csv_num(p.mean_acc) + "," +
           csv_num(p.acc_std) + "," + csv_num(p.similarity) + "\n";
  }
  return out;
}

std::string alignment_csv(const experiment::AlignmentProfile& profile) {
  std::string out = "year,S\n";
  for (const auto& [year, s] : profile.per_year) out += csv::escape(year) + "," + csv_num(s) + "\n";
  return out;
}

std::string shap_csv(const experiment::ShapTrendReport& report) {
  std::string out = "feature,mean_shap,std,t,p,significant\n";
  for (const auto& s : report.stats) {
    out += csv::escape(s.feature) + "," + csv_num(s.mean) + "," + csv_num(s.std) + "," + csv_opt(s.t) + "," +
           csv_opt(s.p) + "," + (s.significant ? "1" : "0") + "\n";
  }
  return out;
}

std::string shap_by_gap_csv(const experiment::ShapTrendReport& report) {
  std::vector<std::string> header{"T"};
  header.insert(header.end(), report.features.begin(), report.features.end());
  std::string out = csv::join(header) + "\n";
  for (const auto& [gap, values] : report.by_gap) {
    out += std::to_string(gap);
    for (double v : values) out += "," + csv_num(v);
    out += "\n";
  }
  return out;
}

std::string trends_csv(const experiment::TrendReport& report) {
  std::string out = "feature,slope,rho,p,significant\n";
  for (const auto& r : report.rows) {
    out += csv::escape(r.feature) + "," + csv_num(r.slope) + "," + csv_opt(r.rho) + "," + csv_opt(r.p) + "," +
           (r.significant ? "1" : "0") + "\n";
  }
  return out;
}

std::string particles_csv(const std::vector<ParticleProfile>& profiles) {
  if (profiles.empty()) return "year,combined\n";
  std::vector<std::string> header{"year"};
  header.insert(header.end(), profiles.front().particles.begin(), profiles.front().particles.end());
  header.emplace_back("combined");
  std::string out = csv::join(header) + "\n";
  for (const auto& p : profiles) {
    out += csv::escape(p.label);
    for (double v : p.per_1000) out += "," + csv_num(v);
    out += "," + csv_num(p.combined) + "\n";
  }
  return out;
}

std::string lex_profiles_csv(const std::vector<YearlyLexProfile>& profiles) {
  if (profiles.empty()) return "year,words,sentences,WPS\n";
  std::vector<std::string> header{"year", "words", "sentences"};
  for (const auto& [name, v] : profiles.front().features()) header.push_back(name);
  std::string out = csv::join(header) + "\n";
  for (const auto& p : profiles) {
    out += csv::escape(p.label) + "," + std::to_string(p.words) + "," + std::to_string(p.sentences);
    for (const auto& [name, v] : p.features()) out += "," + csv_num(v);
    out += "\n";
  }
  return out;
}

}  // namespace diastyle::reports
