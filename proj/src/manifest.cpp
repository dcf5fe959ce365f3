#include "kinkflow/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kinkflow/errors.hpp"
#include "kinkflow/version.hpp"

namespace kinkflow {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

static std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest RunManifest::make(const std::vector<std::string>& argv,
                              const std::string& resolved_config,
                              const std::vector<std::uint64_t>& seeds) {
  RunManifest m;
  m.command_line = argv;
  m.config_digest = fnv1a_hex(resolved_config);
  m.seeds = seeds;
  m.version = kVersion;
  m.timestamp = utc_now();
  return m;
}

std::string to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["format_version"] = m.format_version;
  j["command_line"] = m.command_line;
  j["config_digest"] = m.config_digest;
  j["seeds"] = m.seeds;
  j["version"] = m.version;
  j["timestamp"] = m.timestamp;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunManifest m;
    m.format_version = j.at("format_version").get<int>();
    m.command_line = j.at("command_line").get<std::vector<std::string>>();
    m.config_digest = j.at("config_digest").get<std::string>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.version = j.at("version").get<std::string>();
    m.timestamp = j.at("timestamp").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad manifest: ") + e.what());
  }
}

void save_manifest(const RunManifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot open manifest for writing: " + path);
  out << to_json(m);
  require(out.good(), "failed writing manifest: " + path);
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open manifest: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return manifest_from_json(ss.str());
}

}  // namespace kinkflow
