#pragma once

#include <iosfwd>

namespace tailrisk {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitNumerical = 3,
};

/// Entry point of the `tailrisk` command. Subcommands: ingest, forecast,
/// backtest, simulate, mc-study, report.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tailrisk
