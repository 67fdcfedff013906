#include "diastyle/genprobe.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "diastyle/csv.hpp"
#include "diastyle/error.hpp"
#include "diastyle/rng.hpp"

namespace diastyle::genprobe {

namespace {

using nlohmann::ordered_json;

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view trim_markup(std::string_view s) {
  auto strip = [](char c) { return is_space(c) || c == '*' || c == '_'; };
  while (!s.empty() && strip(s.front())) s.remove_prefix(1);
  while (!s.empty() && strip(s.back())) s.remove_suffix(1);
  return s;
}

bool speaker_word_char(unsigned char c) {
  return c >= 0x80 || std::isalnum(c) || c == '.' || c == '-' || c == '\'' || c == '(' || c == ')' || c == '_';
}

bool markup_only(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return is_space(c) || c == '-' || c == '*' || c == '_' || c == '=' || c == '#' || c == '`';
  });
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

std::string make_template(std::string_view body) { return std::string(body) + "\n\nStarting text:\n{seed}"; }

}  // namespace

PromptScheme make_scheme(std::string name, std::string template_text) {
  if (name.empty()) throw std::invalid_argument("prompt scheme needs a name");
  if (template_text.empty()) throw std::invalid_argument("prompt scheme " + name + ": empty template");
  if (count_occurrences(template_text, kSeedSlot) != 1) {
    throw std::invalid_argument("prompt scheme " + name + ": template needs exactly one {seed} slot");
  }
  return PromptScheme{std::move(name), std::move(template_text)};
}

const std::vector<PromptScheme>& shipped_schemes() {
  static const std::vector<PromptScheme> schemes{
      make_scheme("ZS", make_template("Generate a conversation in Singlish, with the starting text given below.\n"
                                      "Only give the conversation as the output. Do not include anything else. "
                                      "The conversation can be as long as you want.")),
      make_scheme("CoT", make_template("Generate a conversation in Singlish, starting with the text below.\n"
                                       "As you continue the conversation, for every turn, think about what a typical "
                                       "Singaporean might say in response, considering local culture, humour, and "
                                       "context. Do not include your reasoning—only output the conversation.")),
      make_scheme("DD", make_template("Generate a conversation in Singlish, starting with the text below.\n"
                                      "Generate a natural-sounding conversation in the context of Singapore, starting "
                                      "with the text below.\n"
                                      "Aim for variety in topics—let the conversation flow naturally, touching on "
                                      "everyday Singaporean life (food, family, weather, work, etc). Your output "
                                      "should be only the conversation.")),
      make_scheme("SC", make_template("Generate a conversation in Singlish using the starting text below.\n"
                                      "After each line, consider at least three plausible directions the "
                                      "conversation might take, and pick one that feels the most natural or "
                                      "interesting. Only output the conversation.")),
  };
  return schemes;
}

const PromptScheme& find_scheme(std::string_view name) {
  for (const auto& s : shipped_schemes()) {
    if (s.name == name) return s;
  }
  throw std::invalid_argument("unknown prompt scheme '" + std::string(name) + "' (expected ZS, CoT, DD or SC)");
}

std::string render_prompt(const PromptScheme& scheme, std::string_view seed_dialogue) {
  if (trim(seed_dialogue).empty()) throw std::invalid_argument("seed dialogue is empty");
  std::string out = scheme.template_text;
  const auto pos = out.find(kSeedSlot);
  if (pos == std::string::npos) throw std::invalid_argument("prompt scheme " + scheme.name + " has no {seed} slot");
  out.replace(pos, kSeedSlot.size(), seed_dialogue);
  return out;
}

std::string render_prompt(std::string_view scheme_name, std::string_view seed_dialogue) {
  return render_prompt(find_scheme(scheme_name), seed_dialogue);
}

std::string strip_speaker(std::string_view line) {
  line = trim(line);
  const auto colon = line.find(':');
  if (colon == std::string_view::npos) return std::string(line);
  const auto rest = line.substr(colon + 1);
  // "**Name:** text" keeps the closing markup after the colon
  std::size_t skip = 0;
  while (skip < rest.size() && (rest[skip] == '*' || rest[skip] == '_')) ++skip;
  if (skip < rest.size() && !is_space(rest[skip])) return std::string(line);

  const auto name = trim_markup(line.substr(0, colon));
  if (name.empty()) return std::string(line);
  std::size_t words = 0;
  bool in_word = false;
  for (char c : name) {
    if (is_space(c)) {
      in_word = false;
      continue;
    }
    if (!speaker_word_char(static_cast<unsigned char>(c))) return std::string(line);
    if (!in_word) ++words;
    in_word = true;
  }
  if (words == 0 || words > 3) return std::string(line);
  return std::string(trim_markup(rest.substr(skip)));
}

std::vector<std::string> split_turns(std::string_view completion, std::string_view seed_dialogue) {
  std::vector<std::string> seed_turns;
  for (auto line : lines_of(seed_dialogue)) {
    auto t = strip_speaker(line);
    if (!t.empty()) seed_turns.push_back(std::move(t));
  }
  std::vector<std::string> out;
  for (auto line : lines_of(completion)) {
    if (markup_only(line)) continue;
    auto t = strip_speaker(line);
    if (t.empty() || markup_only(t)) continue;
    if (std::find(seed_turns.begin(), seed_turns.end(), t) != seed_turns.end()) continue;
    out.push_back(std::move(t));
  }
  return out;
}

double backoff_ms(const RetryPolicy& policy, std::uint64_t seed, std::size_t index, std::size_t attempt) {
  const double base =
      std::min(policy.max_backoff_ms, policy.initial_backoff_ms * std::ldexp(1.0, static_cast<int>(attempt) - 1));
  SplitMix64 rng(mix64(mix64(seed ^ static_cast<std::uint64_t>(index)) + attempt));
  const double u = rng.uniform() * 2.0 - 1.0;
  return std::max(0.0, base * (1.0 + policy.jitter * u));
}

void validate(const GenerationJob& job) {
  if (job.endpoint.empty()) throw std::invalid_argument("generation needs an endpoint");
  if (job.model.empty()) throw std::invalid_argument("generation needs a model name");
  find_scheme(job.scheme);
  if (job.count < 1) throw std::invalid_argument("count must be at least 1");
  if (!(job.timeout_s > 0.0)) throw std::invalid_argument("timeout must be positive");
  if (job.retry.max_attempts < 1) throw std::invalid_argument("max attempts must be at least 1");
  if (job.concurrency < 1) throw std::invalid_argument("concurrency must be at least 1");
  if (trim(job.seed_dialogue).empty()) throw std::invalid_argument("seed dialogue is empty");
}

std::pair<std::string, std::string> split_endpoint(std::string_view endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string_view::npos) {
    throw std::invalid_argument("endpoint must start with http:// or https://: " + std::string(endpoint));
  }
  const auto scheme = endpoint.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw std::invalid_argument("unsupported endpoint scheme: " + std::string(endpoint));
  }
  const auto slash = endpoint.find('/', scheme_end + 3);
  if (slash == std::string_view::npos) return {std::string(endpoint), "/v1/chat/completions"};
  std::string path(endpoint.substr(slash));
  if (path == "/") path = "/v1/chat/completions";
  return {std::string(endpoint.substr(0, slash)), path};
}

std::string request_body(const GenerationJob& job, const std::string& prompt) {
  ordered_json body;
  body["model"] = job.model;
  body["messages"] = ordered_json::array({ordered_json{{"role", "user"}, {"content", prompt}}});
  if (job.temperature) body["temperature"] = *job.temperature;
  if (job.top_p) body["top_p"] = *job.top_p;
  if (job.max_tokens) body["max_tokens"] = *job.max_tokens;
  return body.dump();
}

std::string completion_text(std::string_view response_body) {
  try {
    const auto doc = nlohmann::json::parse(response_body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw RemoteError(std::string("malformed chat-completion response: ") + e.what());
  }
}

GenerationResult build_cohort(const GenerationJob& job, const std::vector<std::string>& completions) {
  GenerationResult result;
  const std::string label = job.label.empty() ? job.model + "/" + job.scheme : job.label;
  const std::string source = job.model + "/" + job.scheme;
  result.cohort.label = label;
  result.completions = completions.size();
  for (std::size_t i = 0; i < completions.size(); ++i) {
    const auto turns = split_turns(completions[i], job.seed_dialogue);
    if (turns.empty()) ++result.empty_completions;
    for (std::size_t t = 0; t < turns.size(); ++t) {
      char suffix[48];
      std::snprintf(suffix, sizeof suffix, "/%04zu-%03zu", i + 1, t + 1);
      result.cohort.messages.push_back(Message{label + suffix, label, turns[t], source});
    }
  }
  return result;
}

namespace {

struct Outcome {
  bool done = false;
  std::string text;
  std::string error;
  bool fatal = false;
  std::size_t attempts = 0;
};

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

std::string archive_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "request_%04zu.json", index + 1);
  return buf;
}

}  // namespace

GenerationResult generate_cohort(const GenerationJob& job, const std::filesystem::path& output,
                                 const std::filesystem::path& archive_dir) {
  validate(job);
  const std::string prompt = render_prompt(job.scheme, job.seed_dialogue);
  const std::string body = request_body(job, prompt);
  const auto [host, path] = split_endpoint(job.endpoint);

  httplib::Headers headers;
  if (const char* key = std::getenv(job.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  if (!archive_dir.empty()) std::filesystem::create_directories(archive_dir);

  std::vector<Outcome> outcomes(job.count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  const auto timeout = std::chrono::duration<double>(job.timeout_s);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);

  auto worker = [&] {
    httplib::Client client(host);
    client.set_connection_timeout(timeout_us);
    client.set_read_timeout(timeout_us);
    client.set_write_timeout(timeout_us);
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= job.count || abort.load()) return;
      Outcome& out = outcomes[i];
      ordered_json log;
      log["index"] = i + 1;
      log["url"] = host + path;
      log["request"] = ordered_json::parse(body);
      log["responses"] = ordered_json::array();
      for (std::size_t attempt = 1; attempt <= job.retry.max_attempts; ++attempt) {
        out.attempts = attempt;
        auto res = client.Post(path, headers, body, "application/json");
        ordered_json entry;
        entry["attempt"] = attempt;
        if (!res) {
          entry["error"] = httplib::to_string(res.error());
          out.error = "transport error: " + httplib::to_string(res.error());
        } else {
          entry["status"] = res->status;
          entry["body"] = res->body;
          if (res->status == 200) {
            try {
              out.text = completion_text(res->body);
              out.done = true;
            } catch (const RemoteError& e) {
              out.error = e.what();
              out.fatal = true;
            }
          } else {
            out.error = "HTTP " + std::to_string(res->status);
            out.fatal = !retryable(res->status);
          }
        }
        log["responses"].push_back(entry);
        if (out.done || out.fatal || abort.load()) break;
        if (attempt < job.retry.max_attempts) {
          std::this_thread::sleep_for(
              std::chrono::duration<double, std::milli>(backoff_ms(job.retry, job.seed, i, attempt)));
        }
      }
      if (!archive_dir.empty()) io::write_file_atomic(archive_dir / archive_name(i), log.dump(2) + "\n");
      if (!out.done) abort.store(true);
    }
  };

  {
    std::vector<std::jthread> pool;
    const std::size_t n = std::min(job.concurrency, job.count);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  std::vector<std::string> completed;
  std::size_t attempts = 0;
  const Outcome* failed = nullptr;
  std::size_t failed_index = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    attempts += outcomes[i].attempts;
    if (outcomes[i].done) {
      if (!failed) completed.push_back(outcomes[i].text);
    } else if (!failed && outcomes[i].attempts > 0) {
      failed = &outcomes[i];
      failed_index = i;
    }
  }
  if (failed) {
    auto partial = build_cohort(job, completed);
    auto partial_path = output;
    partial_path += ".partial.jsonl";
    io::write_file_atomic(partial_path, to_jsonl(Corpus::from_messages(partial.cohort.messages)));
    throw RemoteError("request " + std::to_string(failed_index + 1) + " failed after " +
                      std::to_string(failed->attempts) + " attempt(s): " + failed->error + "; " +
                      std::to_string(completed.size()) + " completed request(s) saved to " + partial_path.string());
  }
  auto result = build_cohort(job, completed);
  result.attempts = attempts;
  io::write_file_atomic(output, to_jsonl(Corpus::from_messages(result.cohort.messages)));
  return result;
}

}  // namespace diastyle::genprobe
