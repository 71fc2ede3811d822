#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nqkr/nqkr.hpp"

namespace nqkr::cli {

/// `start:stop:count`, both ends included.
inline std::vector<double> parse_range(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
  if (b == std::string::npos) throw ConfigError("range '" + text + "' is not start:stop:count");
  try {
    std::size_t used = 0;
    const std::string count_text = text.substr(b + 1);
    const int count = std::stoi(count_text, &used);
    if (used != count_text.size()) throw ConfigError("bad count");
    return linspace(std::stod(text.substr(0, a)), std::stod(text.substr(a + 1, b - a - 1)), count);
  } catch (const std::logic_error&) {
    throw ConfigError("range '" + text + "' is not start:stop:count");
  }
}

/// Comma-separated numbers.
inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find(',', pos);
    const std::string item = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("'" + item + "' in list '" + text + "' is not a number");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

inline std::string timestamp_utc(const char* fmt = "%Y%m%dT%H%M%SZ") {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, fmt, &tm);
  return buf;
}

/// Creates runs/<timestamp>-<command>/ (or `requested` when given) without
/// reusing an existing directory.
inline std::filesystem::path make_run_dir(const std::string& requested, const std::string& command) {
  namespace fs = std::filesystem;
  if (!requested.empty()) {
    fs::create_directories(requested);
    return requested;
  }
  const fs::path base = fs::path("runs") / (timestamp_utc() + "-" + command);
  fs::path dir = base;
  for (int i = 1; fs::exists(dir); ++i) dir = base.string() + "-" + std::to_string(i);
  fs::create_directories(dir);
  return dir;
}

/// Collects outputs and writes manifest.json at the end of a command.
class RunRecorder {
 public:
  RunRecorder(std::filesystem::path dir, std::string command, std::vector<std::string> args)
      : dir_(std::move(dir)),
        command_(std::move(command)),
        args_(std::move(args)),
        start_(std::chrono::steady_clock::now()),
        started_at_(timestamp_utc("%Y-%m-%dT%H:%M:%SZ")) {}

  const std::filesystem::path& dir() const { return dir_; }

  /// Path inside the run directory, registered as an output.
  std::filesystem::path output(const std::string& name) {
    outputs_.push_back(name);
    return dir_ / name;
  }

  void set_config(const SimConfig& c) { config_ = to_json(c); }
  void add(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

  void finish() {
    nlohmann::json m;
    m["schema_version"] = kManifestSchemaVersion;
    m["tool"] = "nqkr";
    m["tool_version"] = kToolVersion;
    m["command"] = command_;
    m["args"] = args_;
    m["timestamp"] = started_at_;
    m["derived"] = {{"kappa", kPlasticNumber}, {"omega1", default_omega1()}, {"omega2", default_omega2()}};
    if (!config_.is_null()) m["config"] = config_;
    m["outputs"] = outputs_;
    m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (!extra_.is_null()) m["results"] = extra_;
    write_json(dir_ / "manifest.json", m);
  }

 private:
  std::filesystem::path dir_;
  std::string command_;
  std::vector<std::string> args_;
  std::chrono::steady_clock::time_point start_;
  std::string started_at_;
  nlohmann::json config_;
  nlohmann::json extra_;
  std::vector<std::string> outputs_;
};

}  // namespace nqkr::cli
