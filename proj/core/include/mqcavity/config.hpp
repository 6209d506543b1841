#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mqcavity/experiments.hpp"

namespace mqc {

inline const std::vector<std::string> kExperimentTags = {
    "spectrum", "qubit-spectrum", "iswap", "hold-sweep", "ramp-sweep",
    "contour",  "probe",          "ramsey", "stark",     "evolve"};

// Fully resolved run description. Only the block that matches
// `experiment` is meaningful; loadConfig fills every default.
struct RunConfig {
    std::string experiment;
    SystemParams system;
    EvolveOptions solver;
    std::string output = "./";
    bool losses = false;
    int threads = 1;

    std::optional<SweepSpec> g_f_sweep;  // spectrum
    SweepSpec nu_sweep{"nu_q", 4.5, 5.5, 201, "linear"};  // qubit-spectrum
    QubitSweepMode qubit_mode = QubitSweepMode::Both;
    ISwapOptions iswap;
    HoldOptions hold;
    RampOptions ramp;
    ProbeOptions probe;
    RamseyOptions ramsey;
    StarkOptions stark;
    EvolveRunOptions evolve;

    // Push shared settings (solver, losses, threads) into the option
    // blocks and resolve derived defaults. Called by the loaders.
    void resolve();
};

RunConfig loadConfig(const std::string& path);
RunConfig parseConfig(const std::string& json_text);
// Canonical JSON of the resolved config; loadConfig reads it back to
// the same RunConfig.
std::string configToJson(const RunConfig& cfg, int indent = 2);

} // namespace mqc
