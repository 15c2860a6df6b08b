#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "cli/manifest.hpp"

namespace hetbelief::cli {

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> paths;
  std::optional<double> dt;
  std::optional<double> tau_max;
  std::optional<double> t_max;
  std::optional<std::filesystem::path> zbar;
  bool summary = false;
};

/// Each command writes its primary artifact to options.out (or `console`
/// when unset) and records artifact paths, seed and config hash in
/// `manifest`.
void run_simulate(const CommandOptions& options, std::ostream& console, RunManifest& manifest);
void run_stationary_cov(const CommandOptions& options, std::ostream& console, RunManifest& manifest);
void run_cov_path(const CommandOptions& options, std::ostream& console, RunManifest& manifest);
void run_rate_path(const CommandOptions& options, std::ostream& console, RunManifest& manifest);
void run_riccati(const CommandOptions& options, std::ostream& console, RunManifest& manifest);
void run_price(const CommandOptions& options, std::ostream& console, RunManifest& manifest);
void run_verify_vt(const CommandOptions& options, std::ostream& console, RunManifest& manifest);
void run_verify_all(const CommandOptions& options, std::ostream& console, RunManifest& manifest);

}  // namespace hetbelief::cli
