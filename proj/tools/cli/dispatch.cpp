#include "cli/dispatch.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cli/commands.hpp"
#include "cli/manifest.hpp"
#include "hetbelief/errors.hpp"
#include "hetbelief_version.hpp"

namespace hetbelief::cli {
namespace {

using Command = std::function<void(const CommandOptions&, std::ostream&, RunManifest&)>;

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table{
      {"simulate", run_simulate},   {"stationary-cov", run_stationary_cov},
      {"cov-path", run_cov_path},   {"rate-path", run_rate_path},
      {"riccati", run_riccati},     {"price", run_price},
      {"verify-vt", run_verify_vt}, {"verify-all", run_verify_all},
  };
  return table;
}

std::string usage() {
  std::string s = "usage: hetbelief <subcommand> [options]\n\nsubcommands:\n";
  for (const auto& [name, _] : commands()) s += "  " + name + "\n";
  s += "\noptions:\n"
       "  --config PATH   model configuration (JSON), required except for verify-all\n"
       "  --seed U64      RNG seed\n"
       "  --out PATH      primary output file (default: standard output)\n"
       "  --paths N       number of Monte Carlo paths\n"
       "  --dt F          simulation step\n"
       "  --tau-max F     Riccati horizon\n"
       "  --t-max F       price truncation horizon (cov-path: end time)\n"
       "  --zbar PATH     evaluation state (JSON array or {\"zbar\": [...]})\n"
       "  --summary       simulate: cross-path mean and variance per time\n"
       "\nenvironment:\n"
       "  HETBELIEF_THREADS   maximum worker threads\n";
  return s;
}

int fail(std::ostream& err, const char* kind, const std::string& message, int code) {
  nlohmann::json line{{"error", kind}, {"message", message}, {"exit_code", code}};
  err << line.dump() << std::endl;
  return code;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (argc < 2) {
    err << usage();
    return fail(err, "usage", "missing subcommand", kExitValidation);
  }
  const std::string name = argv[1];
  if (name == "-h" || name == "--help") {
    out << usage();
    return kExitOk;
  }
  const auto it = commands().find(name);
  if (it == commands().end()) {
    err << usage();
    return fail(err, "usage", "unknown subcommand '" + name + "'", kExitValidation);
  }

  CommandOptions options;
  CLI::App app{"hetbelief " + name, "hetbelief " + name};
  std::string config, out_path, zbar;
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  double dt = 0.0, tau_max = 0.0, t_max = 0.0;
  auto* config_opt = app.add_option("--config", config, "model configuration (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
  auto* out_opt = app.add_option("--out", out_path, "primary output file");
  auto* paths_opt = app.add_option("--paths", paths, "number of Monte Carlo paths");
  auto* dt_opt = app.add_option("--dt", dt, "simulation step");
  auto* tau_opt = app.add_option("--tau-max", tau_max, "Riccati horizon");
  auto* tmax_opt = app.add_option("--t-max", t_max, "price truncation horizon");
  auto* zbar_opt = app.add_option("--zbar", zbar, "evaluation state (JSON)");
  app.add_flag("--summary", options.summary, "cross-path summary instead of paths");
  if (name != "verify-all") config_opt->required();

  try {
    app.parse(argc - 1, argv + 1);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, "validation", e.what(), kExitValidation);
  }
  if (*config_opt) options.config = config;
  if (*seed_opt) options.seed = seed;
  if (*out_opt) options.out = out_path;
  if (*paths_opt) options.paths = paths;
  if (*dt_opt) options.dt = dt;
  if (*tau_opt) options.tau_max = tau_max;
  if (*tmax_opt) options.t_max = t_max;
  if (*zbar_opt) options.zbar = zbar;

  RunManifest manifest;
  manifest.subcommand = name;
  manifest.version = HETBELIEF_VERSION;
  const auto start = std::chrono::steady_clock::now();
  try {
    it->second(options, out, manifest);
    out.flush();
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(manifest, manifest_path(name, options.out));
  } catch (const ValidationError& e) {
    return fail(err, "validation", e.what(), kExitValidation);
  } catch (const IoError& e) {
    return fail(err, "io", e.what(), kExitValidation);
  } catch (const NumericalError& e) {
    return fail(err, "numerical", e.what(), kExitNumerical);
  } catch (const std::exception& e) {
    return fail(err, "internal", e.what(), kExitNumerical);
  }
  return kExitOk;
}

}  // namespace hetbelief::cli
