#pragma once

#include <iosfwd>
#include <string>

#include "mqcavity/config.hpp"

namespace mqc {

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitSolver = 2, kExitIo = 3 };

ExperimentResult execute(const RunConfig& cfg, RunDiagnostics* diag = nullptr);
std::string summaryLine(const ExperimentResult& r);
// Output file for one table under the configured prefix.
std::string outputPath(const RunConfig& cfg, const std::string& table);

// Runs, writes every table, prints the summary. Returns an ExitCode.
int runExperiment(const RunConfig& cfg, std::ostream& out, std::ostream& err);

} // namespace mqc
