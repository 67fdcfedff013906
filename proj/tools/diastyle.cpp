// diastyle command-line front end.
//
// Exit codes: 0 success, 2 usage or invalid argument, 3 data error,
// 4 remote endpoint error, 1 anything unexpected.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "diastyle/corpus.hpp"
#include "diastyle/csv.hpp"
#include "diastyle/error.hpp"
#include "diastyle/experiment.hpp"
#include "diastyle/feature_matrix.hpp"
#include "diastyle/genprobe.hpp"
#include "diastyle/lexfeat.hpp"
#include "diastyle/reports.hpp"
#include "diastyle/textfeat.hpp"
#include "diastyle/workspace.hpp"

namespace fs = std::filesystem;
using namespace diastyle;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitRemote = 4;

struct Common {
  std::string workspace;
  std::size_t threads = 0;
  std::uint64_t seed = 0;
};

struct ModelOpts {
  std::string features = "handcrafted";
  std::size_t runs = 3;
  double train_fraction = 0.8;
  bool balance = true;
  std::size_t min_cohort_size = 10;
  std::size_t n_trees = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
};

void add_workspace(CLI::App* sub, Common& c, bool required = true) {
  auto* opt = sub->add_option("-w,--workspace", c.workspace, "Workspace directory");
  if (required) opt->required();
  sub->add_option("--threads", c.threads, "Worker threads (0 = hardware concurrency)");
}

void add_model_opts(CLI::App* sub, Common& c, ModelOpts& m, bool with_kind = true) {
  sub->add_option("--seed", c.seed, "Master seed");
  if (with_kind) {
    sub->add_option("--features", m.features, "Feature set")->check(CLI::IsMember({"handcrafted", "embedding"}));
  }
  sub->add_option("--runs", m.runs, "Train/test repetitions per pair")->check(CLI::PositiveNumber);
  sub->add_option("--train-fraction", m.train_fraction, "Training share of each pair")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_flag("--balance,!--no-balance", m.balance, "Downsample the larger cohort of a pair (default on)");
  sub->add_option("--min-cohort-size", m.min_cohort_size, "Skip cohorts with fewer messages");
  sub->add_option("--n-estimators", m.n_trees, "Boosting rounds")->check(CLI::PositiveNumber);
  sub->add_option("--learning-rate", m.learning_rate, "Shrinkage")->check(CLI::PositiveNumber);
  sub->add_option("--max-depth", m.max_depth, "Tree depth")->check(CLI::PositiveNumber);
}

experiment::PairOptions pair_options(const Common& c, const ModelOpts& m) {
  experiment::PairOptions o;
  o.runs = m.runs;
  o.train_fraction = m.train_fraction;
  o.balance = m.balance;
  o.seed = c.seed;
  o.min_cohort_size = m.min_cohort_size;
  o.train.n_trees = m.n_trees;
  o.train.learning_rate = m.learning_rate;
  o.train.max_depth = m.max_depth;
  o.train.seed = c.seed;
  o.threads = c.threads;
  return o;
}

// Canonical JSON of every option value of the subcommand except plumbing
// options that do not affect results.
std::string config_hash(const CLI::App& sub) {
  reports::Json j = reports::Json::object();
  j["command"] = sub.get_name();
  std::map<std::string, std::vector<std::string>> values;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (name == "help" || name == "workspace" || name == "threads" || name == "config") continue;
    if (opt->count() > 0) {
      values[name] = opt->results();
    } else {
      values[name] = {opt->get_default_str()};
    }
  }
  for (const auto& [k, v] : values) j[k] = v;
  return hash_hex(j.dump());
}

struct Context {
  const CLI::App* sub = nullptr;
  std::string hash;
  std::uint64_t seed = 0;

  ReportMeta meta() const { return ReportMeta{sub->get_name(), hash, seed}; }
};

void write_artifact(Workspace& ws, const fs::path& path, const std::string& content, const Context& ctx) {
  fs::create_directories(path.parent_path());
  io::write_file_atomic(path, content);
  ws.record(fs::relative(path, ws.root()).generic_string(), ctx.sub->get_name(), ctx.hash, ctx.seed);
  std::cerr << "wrote " << path.string() << "\n";
}

Corpus load_corpus(const Workspace& ws) {
  return ingest(ws.require(ws.corpus_path(), "extract"), CorpusFormat::jsonl);
}

FeatureMatrix load_features(const Workspace& ws, const Corpus& corpus, FeatureKind kind) {
  if (kind == FeatureKind::handcrafted) {
    return feature_matrix_from_csv(io::read_file(ws.require(ws.features_path(), "extract")), kind);
  }
  const auto emb = import_embeddings(ws.require(ws.embeddings_path(), "import-embeddings"));
  std::vector<std::string> cols;
  for (std::size_t d = 0; d < emb.dim; ++d) cols.push_back("e" + std::to_string(d));
  FeatureMatrix m(cols, kind);
  for (const auto& c : corpus.cohorts()) {
    for (const auto& msg : c.messages) {
      if (const auto* v = emb.find(msg.id)) m.add_row(msg.id, *v);
    }
  }
  return m;
}

// Numeric-label cohorts large enough to model, ascending by year.
std::vector<Cohort> year_cohorts(const Corpus& corpus, std::size_t min_size, std::string_view exclude = {}) {
  std::vector<Cohort> out;
  for (const auto& c : corpus.cohorts()) {
    if (!numeric_label(c.label) || c.label == exclude) continue;
    if (c.messages.size() < min_size) {
      std::cerr << "notice: skipping cohort " << c.label << " (" << c.messages.size() << " messages < "
                << min_size << ")\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

// --- extract -------------------------------------------------------------

struct ExtractOpts {
  std::vector<std::string> inputs;
  std::string format = "auto";
  std::vector<std::string> particles;
  std::string emoticons;
  std::string lexicon;
  std::string summary_config;
};

int cmd_extract(const Common& c, const ExtractOpts& o, const Context& ctx) {
  Workspace ws(c.workspace);
  WorkspaceLock lock(ws);

  std::vector<Message> messages;
  for (const auto& input : o.inputs) {
    const auto fmt = o.format == "auto" ? format_for(input) : (o.format == "csv" ? CorpusFormat::csv : CorpusFormat::jsonl);
    IngestReport report;
    Corpus part;
    try {
      part = ingest(input, fmt, &report);
    } catch (const DataError& e) {
      throw DataError(input + ": " + e.what());
    }
    std::cerr << input << ": " << report.records << " records\n";
    for (const auto& coh : part.cohorts()) messages.insert(messages.end(), coh.messages.begin(), coh.messages.end());
  }
  const Corpus corpus = Corpus::from_messages(std::move(messages));
  for (const auto& coh : corpus.cohorts()) std::cout << coh.label << "\t" << coh.messages.size() << "\n";
  write_artifact(ws, ws.corpus_path(), to_jsonl(corpus), ctx);

  FeatureConfig config = FeatureConfig::defaults();
  if (!o.particles.empty()) config.particles = o.particles;
  if (!o.emoticons.empty()) config.emoticons = load_emoticons(o.emoticons);
  write_artifact(ws, ws.features_path(), to_csv(featurize(corpus, config, c.threads)), ctx);

  if (o.lexicon.empty()) {
    std::cerr << "notice: no --lexicon given, lexicon profiles skipped\n";
    fs::remove(ws.lex_profiles_path());
    fs::remove(ws.lex_profiles_csv_path());
    return 0;
  }
  const Lexicon lexicon = load_lexicon(o.lexicon);
  std::vector<SummaryVariable> summary;
  if (!o.summary_config.empty()) summary = load_summary_config(o.summary_config);
  std::vector<YearlyLexProfile> profiles;
  for (const auto& coh : corpus.cohorts()) profiles.push_back(profile_year(coh, lexicon, summary));
  write_artifact(ws, ws.lex_profiles_path(), reports::dump(reports::to_json(profiles, ctx.meta())), ctx);
  write_artifact(ws, ws.lex_profiles_csv_path(), reports::lex_profiles_csv(profiles), ctx);
  return 0;
}

// --- import-embeddings ---------------------------------------------------

int cmd_import_embeddings(const Common& c, const std::string& input, const Context& ctx) {
  Workspace ws(c.workspace);
  WorkspaceLock lock(ws);
  const Corpus corpus = load_corpus(ws);
  const auto emb = import_embeddings(input);
  const auto report = join(corpus, emb);
  std::cout << "dim " << emb.dim << ", matched " << report.matched << ", messages without vector "
            << report.messages_without_vector.size() << ", vectors without message "
            << report.vectors_without_message.size() << "\n";
  if (report.matched == 0) throw DataError("no embedding id matches a corpus message");
  write_artifact(ws, ws.embeddings_path(), to_jsonl(emb), ctx);
  return 0;
}

// --- gap-curve -----------------------------------------------------------

int cmd_gap_curve(const Common& c, const ModelOpts& m, const Context& ctx) {
  Workspace ws(c.workspace);
  WorkspaceLock lock(ws);
  const auto kind = parse_feature_kind(m.features);
  const Corpus corpus = load_corpus(ws);
  const auto features = load_features(ws, corpus, kind);
  const auto years = year_cohorts(corpus, m.min_cohort_size);
  const auto curve = experiment::gap_curve(years, features, pair_options(c, m));

  const auto dir = ws.reports_dir() / m.features;
  write_artifact(ws, dir / "gap_curve.json", reports::dump(reports::to_json(curve, ctx.meta())), ctx);
  write_artifact(ws, dir / "gap_curve.csv", reports::gap_curve_csv(curve), ctx);
  write_artifact(ws, dir / "pairs.csv", reports::pairs_csv(curve.pairs), ctx);
  std::cout << reports::gap_curve_csv(curve);
  return 0;
}

// --- align ---------------------------------------------------------------

struct AlignOpts {
  std::string cohort;
  double sigma0 = 0.01;
  std::string alternative = "less";
};

int cmd_align(const Common& c, const ModelOpts& m, const AlignOpts& a, const Context& ctx) {
  Workspace ws(c.workspace);
  WorkspaceLock lock(ws);
  const auto kind = parse_feature_kind(m.features);
  const Corpus corpus = load_corpus(ws);
  const Cohort* target = corpus.find(a.cohort);
  if (!target) {
    std::string known;
    for (const auto& l : corpus.labels()) known += (known.empty() ? "" : ", ") + l;
    throw DataError("cohort '" + a.cohort + "' not in the workspace corpus (have: " + known + ")");
  }
  const auto features = load_features(ws, corpus, kind);
  const auto years = year_cohorts(corpus, m.min_cohort_size, a.cohort);
  auto profile = experiment::align_cohort(*target, years, features, pair_options(c, m), std::nullopt);
  if (profile.per_year.size() >= 2) {
    std::vector<double> s;
    for (const auto& [y, v] : profile.per_year) s.push_back(v);
    profile.variance_test = stats::chi2_variance_test(s, a.sigma0, stats::parse_alternative(a.alternative));
  }

  const auto dir = ws.reports_dir() / m.features;
  const auto stem = "alignment_" + safe_name(a.cohort);
  write_artifact(ws, dir / (stem + ".json"), reports::dump(reports::to_json(profile, ctx.meta())), ctx);
  write_artifact(ws, dir / (stem + ".csv"), reports::alignment_csv(profile), ctx);
  std::cout << reports::alignment_csv(profile);
  std::cout << "mean " << io::format_sig(profile.mean, 6) << " std " << io::format_sig(profile.std, 6);
  if (profile.variance_test) {
    std::cout << " chi2 " << io::format_sig(profile.variance_test->chi2, 6) << " p "
              << io::format_sig(profile.variance_test->p, 6);
  }
  std::cout << "\n";
  return 0;
}

// --- shap ----------------------------------------------------------------

int cmd_shap(const Common& c, const ModelOpts& m, const std::string& unit, const Context& ctx) {
  Workspace ws(c.workspace);
  WorkspaceLock lock(ws);
  const Corpus corpus = load_corpus(ws);
  const auto features = load_features(ws, corpus, FeatureKind::handcrafted);
  const auto years = year_cohorts(corpus, m.min_cohort_size);
  const auto report =
      experiment::shap_trends(years, features, pair_options(c, m), experiment::parse_shap_unit(unit));

  const auto dir = ws.reports_dir() / "handcrafted";
  write_artifact(ws, dir / "shap.json", reports::dump(reports::to_json(report, ctx.meta())), ctx);
  write_artifact(ws, dir / "shap.csv", reports::shap_csv(report), ctx);
  write_artifact(ws, dir / "shap_by_gap.csv", reports::shap_by_gap_csv(report), ctx);
  std::cout << reports::shap_csv(report);
  return 0;
}

// --- trends --------------------------------------------------------------

struct TrendOpts {
  std::vector<std::string> features;
  std::string categories;
  std::size_t top_k = 5;
};

int cmd_trends(const Common& c, const TrendOpts& t, const Context& ctx) {
  Workspace ws(c.workspace);
  WorkspaceLock lock(ws);
  auto all = reports::lex_profiles_from_json(
      io::read_file(ws.require(ws.lex_profiles_path(), "extract --lexicon")));
  std::vector<YearlyLexProfile> profiles;
  for (auto& p : all) {
    if (numeric_label(p.label)) profiles.push_back(std::move(p));
  }
  const auto report = experiment::liwc_trends(profiles, t.features);

  std::vector<PcaRanking> pca;
  if (!t.categories.empty()) {
    std::map<std::string, std::string> category_of;
    try {
      const auto doc = nlohmann::json::parse(io::read_file(t.categories));
      for (auto it = doc.begin(); it != doc.end(); ++it) category_of[it.key()] = it.value().get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(t.categories + ": " + e.what());
    }
    std::vector<std::string> names;
    for (const auto& [name, v] : profiles.front().features()) names.push_back(name);
    std::vector<std::vector<double>> rows;
    for (const auto& p : profiles) {
      std::vector<double> row;
      for (const auto& [name, v] : p.features()) row.push_back(v);
      rows.push_back(std::move(row));
    }
    pca = pca_top_features(names, rows, category_of, t.top_k);
  }

  write_artifact(ws, ws.reports_dir() / "trends.json", reports::dump(reports::to_json(report, pca, ctx.meta())), ctx);
  write_artifact(ws, ws.reports_dir() / "trends.csv", reports::trends_csv(report), ctx);
  std::cout << reports::trends_csv(report);
  return 0;
}

// --- particles -----------------------------------------------------------

int cmd_particles(const Common& c, const std::vector<std::string>& particles, const Context& ctx) {
  Workspace ws(c.workspace);
  WorkspaceLock lock(ws);
  const Corpus corpus = load_corpus(ws);
  const auto& list = particles.empty() ? default_particles() : particles;
  std::vector<ParticleProfile> profiles;
  for (const auto& coh : corpus.cohorts()) profiles.push_back(particle_frequencies(coh, list));
  write_artifact(ws, ws.reports_dir() / "particles.json", reports::dump(reports::to_json(profiles, ctx.meta())), ctx);
  write_artifact(ws, ws.reports_dir() / "particles.csv", reports::particles_csv(profiles), ctx);
  std::cout << reports::particles_csv(profiles);
  return 0;
}

// --- generate ------------------------------------------------------------

struct GenerateOpts {
  genprobe::GenerationJob job;
  std::string seed_file;
  std::string output;
  std::optional<double> temperature;
  std::optional<double> top_p;
  std::optional<long> max_tokens;
  bool dry_run = false;
};

int cmd_generate(const Common& c, GenerateOpts g) {
  auto& job = g.job;
  if (!g.seed_file.empty()) job.seed_dialogue = io::read_file(g.seed_file);
  if (g.dry_run) {
    std::cout << genprobe::render_prompt(job.scheme, job.seed_dialogue) << "\n";
    return 0;
  }
  if (g.output.empty()) throw std::invalid_argument("--output is required unless --dry-run is given");
  job.temperature = g.temperature;
  job.top_p = g.top_p;
  job.max_tokens = g.max_tokens;
  job.seed = c.seed;
  genprobe::validate(job);

  const std::string label = job.label.empty() ? job.model + "/" + job.scheme : job.label;
  fs::path archive;
  std::optional<Workspace> ws;
  std::optional<WorkspaceLock> lock;
  if (!c.workspace.empty()) {
    ws.emplace(c.workspace);
    lock.emplace(*ws);
    archive = ws->logs_dir() / "generate" / safe_name(label);
  } else {
    archive = g.output + ".log";
  }
  const auto result = genprobe::generate_cohort(job, g.output, archive);
  std::cout << result.completions << " completions, " << result.cohort.messages.size() << " messages, "
            << result.empty_completions << " empty completions, " << result.attempts << " requests\n";
  if (result.empty_completions > 0) {
    std::cerr << "warning: " << result.empty_completions << " completion(s) produced no message\n";
  }
  return 0;
}

// Reads `--config <file>` (JSON object). Top-level scalars and arrays apply
// to every subcommand, an object keyed by a subcommand name applies to that
// subcommand only. A key is an option's long name. Options given on the
// command line win. Returns argv with the config values appended as options.
std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> args) {
  std::string path;
  std::size_t at = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      at = i;
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      at = i;
      break;
    }
  }
  if (path.empty()) return args;
  args.erase(args.begin() + static_cast<std::ptrdiff_t>(at),
             args.begin() + static_cast<std::ptrdiff_t>(at) + (args[at] == "--config" ? 2 : 1));

  CLI::App* sub = nullptr;
  for (const auto& a : args) {
    for (auto* s : app.get_subcommands({})) {
      if (s->get_name() == a) sub = s;
    }
    if (sub) break;
  }
  if (!sub) return args;

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ValidationError("--config", path + ": " + e.what());
  } catch (const std::exception& e) {
    throw CLI::ValidationError("--config", e.what());
  }
  if (!doc.is_object()) throw CLI::ValidationError("--config", path + ": expected a JSON object");

  std::map<std::string, nlohmann::json> settings;
  for (const auto& [k, v] : doc.items()) {
    if (!v.is_object()) settings[k] = v;
  }
  if (doc.contains(sub->get_name()) && doc[sub->get_name()].is_object()) {
    for (const auto& [k, v] : doc[sub->get_name()].items()) settings[k] = v;
  }

  auto given = [&](const CLI::Option* opt) {
    for (const auto& a : args) {
      for (const auto& n : opt->get_lnames()) {
        if (a == "--" + n || a.rfind("--" + n + "=", 0) == 0) return true;
      }
      for (const auto& n : opt->get_snames()) {
        if (a == "-" + n) return true;
      }
    }
    return false;
  };
  auto scalar = [](const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    if (v.is_number()) return io::format_roundtrip(v.get<double>());
    throw CLI::ValidationError("--config", "unsupported value " + v.dump());
  };

  for (const auto& [key, value] : settings) {
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) {
      // shared keys may not exist for every subcommand
      if (doc.contains(key)) continue;
      throw CLI::ValidationError("--config", "unknown option '" + key + "' for " + sub->get_name());
    }
    if (given(opt)) continue;
    if (value.is_array()) {
      for (const auto& v : value) args.push_back("--" + key + "=" + scalar(v));
    } else {
      args.push_back("--" + key + "=" + scalar(value));
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diachronic stylometry toolkit"};
  app.set_version_flag("--version", std::string("diastyle ") + kToolVersion + " (format " +
                                        std::to_string(kFormatVersion) + ")");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.add_option("--config", "JSON file with option values (command-line flags override it)");

  Common common;
  ModelOpts model;

  ExtractOpts ex;
  auto* extract = app.add_subcommand("extract", "Ingest a corpus and write feature artifacts");
  add_workspace(extract, common);
  extract->add_option("-i,--input", ex.inputs, "Corpus file(s), JSONL or CSV")->required()->check(CLI::ExistingFile);
  extract->add_option("--format", ex.format, "Input format")->check(CLI::IsMember({"auto", "jsonl", "csv"}));
  extract->add_option("--particles", ex.particles, "Discourse particles")->delimiter(',');
  extract->add_option("--emoticons", ex.emoticons, "Emoticon list file")->check(CLI::ExistingFile);
  extract->add_option("--lexicon", ex.lexicon, "Lexicon dictionary (.dic)")->check(CLI::ExistingFile);
  extract->add_option("--summary-config", ex.summary_config, "Summary variable coefficients (JSON)")
      ->check(CLI::ExistingFile);

  std::string emb_input;
  auto* import = app.add_subcommand("import-embeddings", "Import message embeddings (JSONL)");
  add_workspace(import, common);
  import->add_option("-i,--input", emb_input, "Embedding JSONL")->required()->check(CLI::ExistingFile);

  auto* gap = app.add_subcommand("gap-curve", "Similarity against temporal gap");
  add_workspace(gap, common);
  add_model_opts(gap, common, model);

  AlignOpts al;
  auto* align = app.add_subcommand("align", "Similarity of one cohort to every year");
  add_workspace(align, common);
  add_model_opts(align, common, model);
  align->add_option("--cohort", al.cohort, "Cohort label")->required();
  align->add_option("--sigma0", al.sigma0, "Reference standard deviation")->check(CLI::PositiveNumber);
  align->add_option("--alternative", al.alternative, "Variance test alternative")
      ->check(CLI::IsMember({"less", "greater", "two-sided"}));

  std::string unit = "pair";
  auto* shap = app.add_subcommand("shap", "Feature importance across year pairs");
  add_workspace(shap, common);
  add_model_opts(shap, common, model, false);
  shap->add_option("--unit", unit, "Sampling unit of the t-test")->check(CLI::IsMember({"pair", "gap"}));

  TrendOpts tr;
  auto* trends = app.add_subcommand("trends", "Lexicon feature trends over years");
  add_workspace(trends, common);
  trends->add_option("--feature", tr.features, "Features to test (default all)")->delimiter(',');
  trends->add_option("--categories", tr.categories, "JSON map feature -> category for PCA ranking")
      ->check(CLI::ExistingFile);
  trends->add_option("--top-k", tr.top_k, "Features kept per category")->check(CLI::PositiveNumber);

  std::vector<std::string> particles;
  auto* part = app.add_subcommand("particles", "Particle frequencies per 1000 words");
  add_workspace(part, common);
  part->add_option("--particles", particles, "Discourse particles")->delimiter(',');

  GenerateOpts gen;
  auto* generate = app.add_subcommand("generate", "Generate a cohort from a chat-completion endpoint");
  add_workspace(generate, common, false);
  generate->add_option("--seed", common.seed, "Jitter seed");
  generate->add_option("--endpoint", gen.job.endpoint, "Base or chat-completions URL");
  generate->add_option("--model", gen.job.model, "Model name");
  generate->add_option("--scheme", gen.job.scheme, "Prompt scheme")->check(CLI::IsMember({"ZS", "CoT", "DD", "SC"}));
  generate->add_option("--count", gen.job.count, "Completions to request")->check(CLI::PositiveNumber);
  generate->add_option("--seed-dialogue", gen.job.seed_dialogue, "Seed dialogue, inserted verbatim");
  generate->add_option("--seed-file", gen.seed_file, "Read the seed dialogue from a file")->check(CLI::ExistingFile);
  generate->add_option("--temperature", gen.temperature, "Sampling temperature");
  generate->add_option("--top-p", gen.top_p, "Nucleus sampling mass");
  generate->add_option("--max-tokens", gen.max_tokens, "Completion length limit");
  generate->add_option("--timeout", gen.job.timeout_s, "Per-request timeout in seconds")->check(CLI::PositiveNumber);
  generate->add_option("--max-attempts", gen.job.retry.max_attempts, "Attempts per request")
      ->check(CLI::PositiveNumber);
  generate->add_option("--backoff-ms", gen.job.retry.initial_backoff_ms, "First retry delay");
  generate->add_option("--concurrency", gen.job.concurrency, "Parallel requests")->check(CLI::PositiveNumber);
  generate->add_option("--api-key-env", gen.job.api_key_env, "Environment variable holding the API key");
  generate->add_option("--label", gen.job.label, "Cohort label (default <model>/<scheme>)");
  generate->add_option("-o,--output", gen.output, "Output corpus JSONL");
  generate->add_flag("--dry-run", gen.dry_run, "Print the rendered prompt and exit");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    std::vector<std::string> forward(args.rbegin(), args.rend());
    forward = apply_config(app, std::move(forward));
    args.assign(forward.rbegin(), forward.rend());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  Context ctx{sub, config_hash(*sub), common.seed};
  try {
    if (sub == extract) return cmd_extract(common, ex, ctx);
    if (sub == import) return cmd_import_embeddings(common, emb_input, ctx);
    if (sub == gap) return cmd_gap_curve(common, model, ctx);
    if (sub == align) return cmd_align(common, model, al, ctx);
    if (sub == shap) return cmd_shap(common, model, unit, ctx);
    if (sub == trends) return cmd_trends(common, tr, ctx);
    if (sub == part) return cmd_particles(common, particles, ctx);
    if (sub == generate) return cmd_generate(common, gen);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const RemoteError& e) {
    std::cerr << "remote error: " << e.what() << "\n";
    return kExitRemote;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
