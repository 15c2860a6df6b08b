#include "cli/manifest.hpp"

#include <array>
#include <fstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "hetbelief/errors.hpp"

namespace hetbelief::cli {

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["config_hash"] = config_hash.empty() ? nlohmann::json(nullptr) : nlohmann::json(config_hash);
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  j["subcommand"] = subcommand;
  j["artifacts"] = artifacts;
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["version"] = version;
  return j;
}

std::string config_hash(const nlohmann::json& doc) {
  const std::string text = doc.dump();
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::filesystem::path manifest_path(const std::string& subcommand,
                                    const std::optional<std::filesystem::path>& out) {
  if (out) return std::filesystem::path(out->string() + ".manifest.json");
  return std::filesystem::path(subcommand + ".manifest.json");
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write manifest " + path.string());
  f << manifest.to_json().dump(2) << '\n';
  if (!f) throw IoError("cannot write manifest " + path.string());
}

}  // namespace hetbelief::cli
