#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "diastyle/experiment.hpp"
#include "diastyle/lexfeat.hpp"
#include "diastyle/textfeat.hpp"

namespace diastyle {

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr int kFormatVersion = 1;

// Provenance stamped into every report.
struct ReportMeta {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
};

namespace reports {

using Json = nlohmann::ordered_json;

// Serializes with floats as %.17g (non-finite -> null), keys in insertion
// order, two-space indentation and a trailing newline.
std::string dump(const Json& doc);

Json meta_json(const ReportMeta& meta);

Json to_json(const experiment::PairResult& pair);
Json to_json(const experiment::GapCurve& curve, const ReportMeta& meta);
Json to_json(const experiment::AlignmentProfile& profile, const ReportMeta& meta);
Json to_json(const experiment::ShapTrendReport& report, const ReportMeta& meta);
Json to_json(const experiment::TrendReport& report, const std::vector<PcaRanking>& pca, const ReportMeta& meta);
Json to_json(const std::vector<YearlyLexProfile>& profiles, const ReportMeta& meta);
Json to_json(const std::vector<ParticleProfile>& profiles, const ReportMeta& meta);

std::vector<YearlyLexProfile> lex_profiles_from_json(const std::string& text);

// Plot-ready CSV, floats with 6 significant digits.
std::string gap_curve_csv(const experiment::GapCurve& curve);         // T,mean_S,std
std::string pairs_csv(const std::vector<experiment::PairResult>& pairs);
std::string alignment_csv(const experiment::AlignmentProfile& profile);  // year,S
std::string shap_csv(const experiment::ShapTrendReport& report);         // feature,mean_shap,std,t,p,significant
std::string shap_by_gap_csv(const experiment::ShapTrendReport& report);  // T,<features>
std::string trends_csv(const experiment::TrendReport& report);           // feature,slope,rho,p,significant
std::string particles_csv(const std::vector<ParticleProfile>& profiles); // year,<particles>,combined
std::string lex_profiles_csv(const std::vector<YearlyLexProfile>& profiles);

}  // namespace reports
}  // namespace diastyle
