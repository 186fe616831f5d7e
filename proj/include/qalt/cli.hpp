#pragma once

namespace qalt {

// Full command-line front end: parses argv, runs one subcommand, prints
// human-readable results to stdout, and optionally writes a deterministic
// JSON run report (--json). Returns the process exit code:
//   0 success / YES
//   1 NO verdict, or minimax gap above 2 * tolerance
//   2 malformed input (parse or validation failure)
//   3 resource cap exceeded
//   4 solver did not converge / verdict undecided
//   5 unsupported level
//   6 promise violation / value inside the gap
//   7 internal error
int run_cli(int argc, char** argv);

}  // namespace qalt
