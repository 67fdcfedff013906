#include "diastyle/workspace.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstring>

#include <fcntl.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "diastyle/csv.hpp"
#include "diastyle/error.hpp"
#include "diastyle/reports.hpp"
#include "diastyle/rng.hpp"

namespace diastyle {

namespace fs = std::filesystem;

Workspace::Workspace(fs::path root) : root_(std::move(root)) {
  if (root_.empty()) throw std::invalid_argument("workspace path is empty");
  if (fs::exists(root_) && !fs::is_directory(root_)) {
    throw DataError("workspace " + root_.string() + " is not a directory");
  }
  fs::create_directories(root_);
}

fs::path Workspace::require(const fs::path& artifact, std::string_view producer) const {
  if (!fs::exists(artifact)) {
    throw DataError("missing workspace artifact " + artifact.string() + " (run '" + std::string(producer) +
                    "' first)");
  }
  return artifact;
}

void Workspace::record(const std::string& artifact, const std::string& command, const std::string& config_hash,
                       std::uint64_t seed) {
  reports::Json manifest;
  if (fs::exists(manifest_path())) {
    try {
      manifest = reports::Json::parse(io::read_file(manifest_path()));
    } catch (const reports::Json::exception& e) {
      throw DataError("corrupt manifest " + manifest_path().string() + ": " + e.what());
    }
  }
  manifest["tool_version"] = kToolVersion;
  manifest["format_version"] = kFormatVersion;
  manifest["config_hash"] = config_hash;
  manifest["seed"] = seed;
  if (!manifest.contains("artifacts") || !manifest["artifacts"].is_object()) {
    manifest["artifacts"] = reports::Json::object();
  }
  manifest["artifacts"][artifact] = reports::Json{{"command", command}, {"config_hash", config_hash}, {"seed", seed}};

  // keep artifact keys sorted so the manifest does not depend on command order
  reports::Json sorted = reports::Json::object();
  std::vector<std::string> keys;
  for (const auto& [k, v] : manifest["artifacts"].items()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (const auto& k : keys) sorted[k] = manifest["artifacts"][k];
  manifest["artifacts"] = sorted;
  io::write_file_atomic(manifest_path(), reports::dump(manifest));
}

WorkspaceLock::WorkspaceLock(const Workspace& ws) : path_(ws.lock_path()) {
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw DataError("workspace is locked: " + path_.string() + " exists (remove it if no other run is active)");
    }
    throw DataError("cannot create lock " + path_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

WorkspaceLock::~WorkspaceLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

std::string safe_name(std::string_view label) {
  std::string out;
  for (unsigned char c : label) {
    out.push_back(std::isalnum(c) || c == '-' || c == '.' || c == '_' ? static_cast<char>(c) : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

std::string hash_hex(std::string_view text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

}  // namespace diastyle
