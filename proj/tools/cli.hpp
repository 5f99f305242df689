#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plcert::cli {

enum ExitCode : int { kOk = 0, kNegative = 1, kUsage = 2, kBudget = 3 };

/// Default piece-count and bit-length budgets, overridable per run.
constexpr const char* kMaxPiecesEnv = "PLCERT_MAX_PIECES";
constexpr const char* kMaxBitsEnv = "PLCERT_MAX_BITS";

/// Runs one command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plcert::cli
