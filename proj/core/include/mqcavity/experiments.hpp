#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mqcavity/analysis.hpp"
#include "mqcavity/dynamics.hpp"

namespace mqc {

struct SweepSpec {
    std::string parameter;
    double min = 0.0;
    double max = 1.0;
    int npoints = 2;
    std::string scale = "linear";

    void validate() const;
    std::vector<double> values() const;
    bool operator==(const SweepSpec&) const = default;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void addRow(std::vector<double> row);
    std::vector<double> column(const std::string& col) const;
};

struct ExperimentResult {
    std::string kind;
    std::vector<Table> tables;
    std::vector<std::pair<std::string, double>> summary;
    std::string metadata;  // resolved config snapshot (JSON text)

    const Table& table(const std::string& name) const;
    double scalar(const std::string& key) const;
};

// Run fn(0..n-1) on up to `threads` workers; results stay in index order.
template <typename T>
std::vector<T> orderedMap(int n, int threads, const std::function<T(int)>& fn);

// Which invariant subspace a closed or lossy run is evolved in.
enum class Basis { Full, Sector };

// Evolution in the <= k excitation sector, with helpers to map back.
struct Sector {
    Mat iso;  // full x reduced
    int max_excitations = 1;

    Vec toFull(const Vec& v) const { return iso * v; }
    Mat toFull(const Mat& rho) const { return iso * rho * iso.adjoint(); }
};

Sector makeSector(const OperatorSet& ops, int max_excitations);

// Diagnostics every dynamical run carries for the invariant checks.
struct RunDiagnostics {
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double max_excitation_drift = 0.0;  // closed runs only, else 0
    double max_norm_error = 0.0;
    std::size_t warnings = 0;

    void merge(const RunDiagnostics& o);
};

// ---- spectroscopy ----

ExperimentResult filterSpectrum(const SystemParams& p, const std::optional<SweepSpec>& g_f_sweep = std::nullopt);

enum class QubitSweepMode { Both, Q1 };

ExperimentResult qubitFilterSpectrum(const SystemParams& p, const SweepSpec& nu_sweep,
                                     QubitSweepMode mode = QubitSweepMode::Both);
// Smallest gap between branches `lower` and `lower+1` over a sweep.
double minBranchGap(const SystemParams& p, const SweepSpec& nu_sweep, QubitSweepMode mode, int lower);

// ---- iSWAP ----

enum class ISwapTiming { Literal, Eigenmode };

struct ISwapOptions {
    double t_offset1 = 5.0;
    double t_offset2 = 75.0;
    ISwapTiming timing = ISwapTiming::Literal;
    int mode_index = 0;  // 0 picks the center mode
    double tail = 20.0;  // ns simulated after q2 returns
    bool with_losses = false;
    Basis basis = Basis::Sector;
    EvolveOptions solver;
};

struct ISwapTimes {
    double g_eff = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    double nu_mode = 0.0;
};

ISwapTimes iswapTimes(const SystemParams& p, const ISwapOptions& o);
ExperimentResult runISwap(const SystemParams& p, const ISwapOptions& o, RunDiagnostics* diag = nullptr);

// ---- hold-time sweep ----

struct HoldOptions {
    double dt_ramp = 10.0;
    double t_offset = 5.0;
    double tail = 30.0;    // ns after the ramp down
    double settle = 10.0;  // averaging window at the end
    int mode_index = 0;    // 0 picks the center mode
    Shape shape = Shape::Linear;
    SweepSpec t_hold{"t_hold", 0.0, 100.0, 21, "linear"};
    bool with_losses = false;
    EvolveOptions solver;
    int threads = 1;
};

ExperimentResult holdSweep(const SystemParams& p, const HoldOptions& o, RunDiagnostics* diag = nullptr);

// ---- ramp-time (Landau-Zener) sweep and loading contours ----

struct RampOptions {
    std::vector<int> cavities{1, 3, 6};
    double period = 110.0;
    std::optional<double> nu_top;  // absolute GHz; default nu_f + 2 g_f + top_margin
    double top_margin = 0.1;
    double tail = 40.0;      // post-pulse window
    double split = 20.0;          // FFT windows meet here
    double amp_short_to = 15.0;   // amplitude window [first ramp, amp_short_to]
    double amp_long_from = 40.0;  // amplitude window [amp_long_from, last ramp]
    double fmin = 0.05;      // GHz, fringe peak search floor
    double load_threshold = 0.2;
    Shape shape = Shape::Linear;
    SweepSpec ramp{"ramp", 0.0, 55.0, 56, "linear"};
    EvolveOptions solver;
    int threads = 1;

    double top(const SystemParams& p) const;
};

// Closed evolution of one ramp-sweep point in the one-excitation sector.
TimeSeries rampRun(const SystemParams& p, int n_cavities, double ramp, const RampOptions& o,
                   Basis basis = Basis::Sector);
ExperimentResult rampSweep(const SystemParams& p, const RampOptions& o, RunDiagnostics* diag = nullptr);
ExperimentResult loadingContour(const SystemParams& p, const RampOptions& o, RunDiagnostics* diag = nullptr);

// ---- probe scan ----

struct ProbeOptions {
    double omega_p = 0.01;    // rad/ns
    double duration = 200.0;  // ns
    SweepSpec nu{"nu_probe", 4.6, 5.4, 81, "linear"};
    EvolveOptions solver;
    int threads = 1;
};

ExperimentResult probeScan(const SystemParams& p, const ProbeOptions& o, RunDiagnostics* diag = nullptr);

// ---- Ramsey / Stark ----

enum class RamseyMethod { Compose, Direct };

struct RamseyOptions {
    double nu_q2 = 4.1;
    double dt_ramp = 10.0;
    std::optional<double> t_hold;  // default: long enough for the tau window
    std::optional<double> nu_q1_top;  // default: band top + 4 g_f
    double top_margin_gf = 4.0;
    double t_pre = 5.0;    // idle time before q1 ramps
    double lead = 5.0;     // q2 starts this long into the q1 hold
    double q2_ramp = 80.0;
    Shape q2_shape = Shape::RaisedCosine;
    double t_post = 5.0;
    double f_art = 0.05;   // GHz, artificial detuning of the final pulse
    SweepSpec tau{"tau", 0.0, 250.0, 500, "linear"};
    RamseyMethod method = RamseyMethod::Compose;
    bool with_losses = false;
    EvolveOptions solver;
    int threads = 1;

    double q1Top(const SystemParams& p) const;
    double holdTime() const;
};

// n_q1 after the final pulse, one value per tau.
std::vector<double> ramseySignal(const SystemParams& p, const RamseyOptions& o, RunDiagnostics* diag = nullptr);
ExperimentResult ramseyRun(const SystemParams& p, const RamseyOptions& o, RunDiagnostics* diag = nullptr);

struct StarkOptions {
    RamseyOptions ramsey;
    SweepSpec nu_q2{"nu_q2", 4.2, 5.2, 20, "linear"};
    double fmin = 0.01;
};

ExperimentResult starkSweep(const SystemParams& p, const StarkOptions& o, RunDiagnostics* diag = nullptr);
// Shift of the q1-like dressed level predicted by adiabatic following.
double adiabaticStarkShift(const SystemParams& p, const RamseyOptions& o, double nu_q2);

// ---- free-form evolution ----

struct EvolveRunOptions {
    Schedule schedule;
    std::string initial = "q1";  // ground | q1 | q2 | q1-plus
    bool with_losses = false;
    std::optional<ProbeSpec> probe;
    Basis basis = Basis::Sector;
    EvolveOptions solver;
};

ExperimentResult evolveRun(const SystemParams& p, const EvolveRunOptions& o, RunDiagnostics* diag = nullptr);

} // namespace mqc

#include "mqcavity/detail/ordered_map.hpp"
