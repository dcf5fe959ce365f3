#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kinkflow {

// Reproducibility sidecar written once per output directory. Re-running the
// recorded command line regenerates all raw records bit-identically; only
// wall-time fields may differ.
struct RunManifest {
  int format_version = 1;
  std::vector<std::string> command_line;
  std::string config_digest;  // fnv1a-64 over the resolved configuration text
  std::vector<std::uint64_t> seeds;
  std::string version;
  std::string timestamp;  // ISO 8601 UTC

  static RunManifest make(const std::vector<std::string>& argv,
                          const std::string& resolved_config,
                          const std::vector<std::uint64_t>& seeds);
};

// FNV-1a 64-bit of a byte string, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

std::string to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);
void save_manifest(const RunManifest& m, const std::string& path);
RunManifest load_manifest(const std::string& path);

}  // namespace kinkflow
