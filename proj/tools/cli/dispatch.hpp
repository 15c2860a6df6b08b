#pragma once

#include <iosfwd>

namespace hetbelief::cli {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

/// Parses argv, runs the subcommand, writes its manifest. Failures print one
/// JSON object line on `err`: {"error": kind, "message": text, "exit_code": n}.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hetbelief::cli
