#pragma once

#include <complex>
#include <ostream>
#include <string>
#include <vector>

namespace fraclab {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitToleranceFailure = 1, kExitError = 2 };

/// Runs one subcommand. args excludes the program name, e.g.
/// {"entangle", "--config", "zero.cfg", "--out", "run"}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "1", "-2.5i", "1+0i", "0.5-3i".
std::complex<double> parse_complex(const std::string& text);

}  // namespace fraclab
