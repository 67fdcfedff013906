#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "diastyle/corpus.hpp"

namespace diastyle::genprobe {

struct PromptScheme {
  std::string name;
  std::string template_text;  // exactly one "{seed}" slot
};

inline constexpr std::string_view kSeedSlot = "{seed}";
inline constexpr std::string_view kDefaultSeedDialogue =
    "Person A: Eh bro, you going out later or not?\nPerson B:";

// Validates name and template. Throws std::invalid_argument.
PromptScheme make_scheme(std::string name, std::string template_text);

// ZS, CoT, DD, SC.
const std::vector<PromptScheme>& shipped_schemes();
// Exact name match; throws std::invalid_argument for an unknown scheme.
const PromptScheme& find_scheme(std::string_view name);

// Seed inserted verbatim. Throws std::invalid_argument on an empty seed.
std::string render_prompt(const PromptScheme& scheme, std::string_view seed_dialogue);
std::string render_prompt(std::string_view scheme_name, std::string_view seed_dialogue);

// Removes a leading speaker label: 1-3 words followed by ':' and then
// whitespace or end of line, optionally wrapped in '*' markup, e.g.
// "Person A: hi", "**Mei:** hi", "*Ah Boy*: hi". Returns the line trimmed.
std::string strip_speaker(std::string_view line);

// One message per non-empty line after speaker stripping. Lines made only
// of markup characters (- * _ = # `) are dropped, as are turns that repeat
// a turn of the seed dialogue.
std::vector<std::string> split_turns(std::string_view completion, std::string_view seed_dialogue = {});

struct RetryPolicy {
  std::size_t max_attempts = 5;
  double initial_backoff_ms = 500.0;
  double max_backoff_ms = 16000.0;
  double jitter = 0.25;  // multiplicative, +/- fraction of the delay
};

// Backoff before retry `attempt` (1-based) of request `index`.
double backoff_ms(const RetryPolicy& policy, std::uint64_t seed, std::size_t index, std::size_t attempt);

struct GenerationJob {
  std::string endpoint;  // base URL or full chat-completions URL
  std::string model;
  std::string scheme = "ZS";
  std::size_t count = 100;  // completions to request
  std::string seed_dialogue{kDefaultSeedDialogue};
  std::optional<double> temperature;
  std::optional<double> top_p;
  std::optional<long> max_tokens;
  double timeout_s = 60.0;
  RetryPolicy retry;
  std::size_t concurrency = 4;
  std::string api_key_env = "OPENAI_API_KEY";
  std::uint64_t seed = 0;  // jitter stream
  std::string label;       // defaults to "<model>/<scheme>"
};

void validate(const GenerationJob& job);

struct GenerationResult {
  Cohort cohort;
  std::size_t completions = 0;
  std::size_t empty_completions = 0;
  std::size_t attempts = 0;
};

// Splits an endpoint into scheme://host[:port] and request path. A URL
// without a path gets "/v1/chat/completions".
std::pair<std::string, std::string> split_endpoint(std::string_view endpoint);

std::string request_body(const GenerationJob& job, const std::string& prompt);
// choices[0].message.content; throws RemoteError on a malformed body.
std::string completion_text(std::string_view response_body);

// Turns completions (request order) into a cohort: ids "<label>/<req>-<turn>".
GenerationResult build_cohort(const GenerationJob& job, const std::vector<std::string>& completions);

// Requests `count` completions, archives each request and its responses as
// JSON under `archive_dir` (when non-empty), and writes the cohort as corpus
// JSONL to `output`. On failure the completed requests are written to
// "<output>.partial.jsonl", `output` is left untouched and RemoteError is
// thrown.
GenerationResult generate_cohort(const GenerationJob& job, const std::filesystem::path& output,
                                 const std::filesystem::path& archive_dir = {});

}  // namespace diastyle::genprobe
