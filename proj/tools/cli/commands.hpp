#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "qeflab/error.hpp"

namespace qeflab::cli {

enum ExitCode : int {
  kExitPass = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitMismatch = 4,
};

int exit_code_for(ErrorCode code);

/// One line of JSON: {"error": "<code>", "message": "..."}.
std::string error_json(ErrorCode code, const std::string& message);

int cmd_model_check(const RunConfig& cfg, std::ostream& log);
int cmd_eigen(const RunConfig& cfg, std::ostream& log);
int cmd_qef(const RunConfig& cfg, std::ostream& log);
int cmd_validate(const RunConfig& cfg, std::ostream& log);
int cmd_fock(const RunConfig& cfg, std::ostream& log);

/// Dispatches a command and maps qeflab::Error to an exit code plus a JSON
/// line on err.
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command line, without the program name:
/// <model-check|eigen|qef|validate|fock> --config PATH [--seed U64] [--out DIR].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count for Monte-Carlo batches, capped by QEFLAB_THREADS.
unsigned thread_budget();

}  // namespace qeflab::cli
