#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hetbelief::cli {

struct RunManifest {
  std::string config_hash;  // empty when the subcommand takes no config
  std::optional<std::uint64_t> seed;
  std::string subcommand;
  std::vector<std::string> artifacts;
  double wall_clock_seconds = 0.0;
  std::string version;

  nlohmann::json to_json() const;
};

/// SHA-256 (hex) of the compact dump of `doc`. nlohmann::json keeps object
/// keys sorted, so the hash ignores key order in the source file.
std::string config_hash(const nlohmann::json& doc);

/// <out>.manifest.json next to the primary artifact, or
/// <subcommand>.manifest.json in the working directory.
std::filesystem::path manifest_path(const std::string& subcommand,
                                    const std::optional<std::filesystem::path>& out);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace hetbelief::cli
