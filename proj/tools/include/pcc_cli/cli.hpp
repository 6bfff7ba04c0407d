#pragma once

namespace pcc_cli {

// Parses arguments and dispatches to one of the verbs (filter, fit, simulate,
// tail, risk, report). Returns the process exit code: 0 success, 2 config
// error, 3 data error, 4 numeric failure or non-convergence.
int run_cli(int argc, const char* const* argv);

}  // namespace pcc_cli
