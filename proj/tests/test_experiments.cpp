#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "mqcavity/experiments.hpp"

using namespace mqc;

namespace {

SystemParams iswapParams()
{
    SystemParams p;
    p.g_f = 0.0118;
    return p;
}

} // namespace

TEST_CASE("filter spectrum")
{
    SystemParams p;
    p.g_f = 0.135;
    auto r = filterSpectrum(p);
    auto nu = r.table("spectrum").column("nu_ghz");
    REQUIRE(nu.size() == 3);
    CHECK(std::abs(nu[0] - (5 - std::sqrt(2.0) * 0.135)) < 1e-9);
    CHECK(std::abs(nu[1] - 5.0) < 1e-9);
    CHECK(std::abs(nu[2] - (5 + std::sqrt(2.0) * 0.135)) < 1e-9);
    CHECK(r.scalar("max_closed_form_error_ghz") < 1e-12);

    p.n_cavities = 6;
    auto six = filterSpectrum(p).table("spectrum").column("nu_ghz");
    REQUIRE(six.size() == 6);
    for (int k = 0; k < 6; ++k) {
        CHECK(std::abs(six[k] - 5.0 + (six[5 - k] - 5.0)) < 1e-12);
        if (k > 0) CHECK(six[k] - six[k - 1] > 1e-3);
    }

    p.g_f = 0;
    for (double v : filterSpectrum(p).table("spectrum").column("nu_ghz")) CHECK(std::abs(v - 5.0) < 1e-12);

    p = SystemParams{};
    auto sw = filterSpectrum(p, SweepSpec{"g_f", 0.0, 0.2, 5, "linear"});
    CHECK(sw.table("spectrum").rows.size() == 15);
}

TEST_CASE("qubit-filter spectrum limits")
{
    SystemParams p;
    p.g_q1f = 0.0135;
    auto r = qubitFilterSpectrum(p, SweepSpec{"nu_q", 2.9, 3.0, 2, "linear"}, QubitSweepMode::Both);
    auto all = r.table("qubit_spectrum").column("nu_ghz");
    REQUIRE(all.size() == 10);
    std::vector<double> b(all.begin() + 5, all.end());
    // both qubits far below: two branches near 3 GHz, then the filter levels
    CHECK(std::abs(b[0] - 3.0) < 1e-3);
    CHECK(std::abs(b[1] - 3.0) < 1e-3);
    for (int k = 1; k <= 3; ++k) {
        const double delta = resonanceTarget(p, k) - 3.0;
        CHECK(std::abs(b[1 + k] - resonanceTarget(p, k)) < 2 * 0.0135 * 0.0135 / delta);
    }
}

TEST_CASE("avoided-crossing gap grows with the coupling")
{
    SystemParams p;
    const SweepSpec sw{"nu_q", 4.9, 5.1, 2001, "linear"};
    // branch 0 is q2 at idle, 1 is the lowest mode; q1 meets the center mode between 2 and 3
    std::vector<double> gaps;
    for (double g : {0.0135, 3 * 0.0135, 10 * 0.0135}) {
        p.g_q1f = g;
        gaps.push_back(minBranchGap(p, sw, QubitSweepMode::Q1, 2));
    }
    CHECK(gaps[0] < gaps[1]);
    CHECK(gaps[1] < gaps[2]);
    // center-mode overlap 1/sqrt(2) sets the weak-coupling splitting
    CHECK(gaps[0] == doctest::Approx(2 * 0.0135 / std::sqrt(2.0)).epsilon(0.02));

    // a decoupled q1 crosses the center-like level exactly; q2 shifts that level slightly
    p.g_q1f = 0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(singleExcitationBlock(p, 4.3, p.nu_q2_idle));
    const double level = es.eigenvalues()(3);
    CHECK(std::abs(level - 5.0) < 1e-3);
    CHECK(minBranchGap(p, SweepSpec{"nu_q", level - 0.1, level + 0.1, 3, "linear"}, QubitSweepMode::Q1, 2) < 1e-10);
}

TEST_CASE("iSWAP transfers the excitation")
{
    SystemParams p = iswapParams();
    ISwapOptions o;
    RunDiagnostics d;
    auto r = runISwap(p, o, &d);
    CHECK(r.scalar("n_q1_final") <= 0.1);
    CHECK(r.scalar("n_q2_final") >= 0.7);
    CHECK(r.scalar("t1_ns") == doctest::Approx(1 / (4 * 0.0135)));
    CHECK(d.max_norm_error < 1e-8);
    CHECK(d.max_excitation_drift < 1e-8);

    ISwapOptions lossy = o;
    lossy.with_losses = true;
    RunDiagnostics dl;
    auto rl = runISwap(p, lossy, &dl);
    CHECK(r.scalar("fidelity") - rl.scalar("fidelity") >= 0.15);
    CHECK(dl.max_trace_error < 1e-8);
    CHECK(dl.max_hermiticity_error < 1e-8);

    auto cols = r.table("iswap").columns;
    CHECK(cols.front() == "t_ns");
    CHECK(std::find(cols.begin(), cols.end(), "concurrence") != cols.end());
}

TEST_CASE("iSWAP with decoupled qubits does nothing")
{
    SystemParams p = iswapParams();
    p.g_q1f = p.g_q2f = 0;
    auto r = runISwap(p, ISwapOptions{});
    CHECK(std::abs(r.scalar("n_q1_final") - 1.0) < 1e-6);
}

TEST_CASE("sector reduction matches the full space")
{
    SystemParams p = iswapParams();
    ISwapOptions o;
    o.tail = 0;
    auto a = runISwap(p, o);
    o.basis = Basis::Full;
    auto b = runISwap(p, o);
    CHECK(a.scalar("fidelity") == doctest::Approx(b.scalar("fidelity")).epsilon(1e-7));
    CHECK(a.scalar("concurrence") == doctest::Approx(b.scalar("concurrence")).epsilon(1e-6));
    CHECK(a.scalar("n_q2_final") == doctest::Approx(b.scalar("n_q2_final")).epsilon(1e-7));

    Sector s = makeSector(buildOperators(p), 1);
    CHECK(s.iso.cols() == 6);
    CHECK(s.iso.rows() == 32);
}

TEST_CASE("hold sweep")
{
    // slow ramps in and out return the excitation to q1
    SystemParams ad;
    ad.g_q1f = 0.05;
    HoldOptions o;
    o.dt_ramp = 300;
    o.t_hold = SweepSpec{"t_hold", 0.0, 1.0, 2, "linear"};
    CHECK(holdSweep(ad, o).table("hold_sweep").column("n_q1_final")[0] >= 0.95);

    SystemParams p = iswapParams();

    HoldOptions osc;
    osc.t_hold = SweepSpec{"t_hold", 0.0, 40.0, 9, "linear"};
    auto f = holdSweep(p, osc).table("hold_sweep").column("n_q1_final");
    auto [mn, mx] = std::minmax_element(f.begin(), f.end());
    CHECK(*mx - *mn > 0.3);

    p.g_q1f = p.g_q2f = 0;
    for (double v : holdSweep(p, osc).table("hold_sweep").column("n_q1_final")) CHECK(std::abs(v - 1.0) < 1e-9);
}

TEST_CASE("loading contour rows are the ramp runs")
{
    SystemParams p;
    p.g_f = 0.07;
    p.g_q1f = p.g_q2f = 0.05;
    p.nu_q1_idle = 4.6;
    RampOptions o;
    o.cavities = {1};
    o.ramp = SweepSpec{"ramp", 0.0, 20.0, 3, "linear"};
    auto r = loadingContour(p, o);
    const auto& t = r.table("contour");
    TimeSeries ts = rampRun(p, 1, 10.0, o);
    std::vector<double> row;
    for (const auto& v : t.rows)
        if (v[1] == 10.0) row.push_back(v[3]);
    const auto& nq = ts.series("n_q1");
    REQUIRE(row.size() <= nq.size());
    for (std::size_t i = 0; i < row.size(); ++i) CHECK(row[i] == nq[i]);

    p.g_q1f = 0;
    const auto zero = loadingContour(p, o);
    for (const auto& v : zero.table("contour").rows) CHECK(std::abs(v[3] - 1.0) < 1e-9);
    CHECK_THROWS_AS(rampRun(p, 1, 80.0, o), ConfigError);
}

TEST_CASE("probe scan")
{
    SystemParams p;
    ProbeOptions o;
    o.duration = 100;
    o.nu = SweepSpec{"nu_probe", 4.65, 4.7, 2, "linear"};
    for (double v : probeScan(p, o).table("probe").column("response")) CHECK(v <= 0.05);

    // q1's dressed line sits within g^2/Delta of its idle frequency
    o.nu = SweepSpec{"nu_probe", 4.296, 4.304, 5, "linear"};
    auto r = probeScan(p, o);
    const double tol = 2 * o.omega_p / kTwoPi;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(singleExcitationBlock(p, p.nu_q1_idle, p.nu_q2_idle));
    double nearest = 1e9;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        nearest = std::min(nearest, std::abs(es.eigenvalues()(i) - r.scalar("peak_nu_ghz")));
    CHECK(nearest <= tol);

    o.omega_p = 0;
    o.nu = SweepSpec{"nu_probe", 4.3, 5.0, 2, "linear"};
    for (double v : probeScan(p, o).table("probe").column("response")) CHECK(v == 0.0);
}

TEST_CASE("Ramsey fringes")
{
    SystemParams p;
    p.g_f = 0.106;
    p.g_q1f = 0.1;
    p.g_q2f = 0.053;
    p.nu_q2_idle = 3.5;
    RamseyOptions o;
    o.nu_q2 = 4.8;
    o.tau = SweepSpec{"tau", 0.0, 30.0, 16, "linear"};
    auto compose = ramseySignal(p, o);
    o.method = RamseyMethod::Direct;
    auto direct = ramseySignal(p, o);
    REQUIRE(compose.size() == direct.size());
    for (std::size_t i = 0; i < compose.size(); ++i) CHECK(std::abs(compose[i] - direct[i]) < 1e-6);
    auto [mn, mx] = std::minmax_element(compose.begin(), compose.end());
    CHECK(*mx - *mn > 0.2);

    RamseyOptions ref;
    ref.nu_q2 = p.nu_q2_idle;
    auto r = ramseyRun(p, ref);
    CHECK(r.scalar("fringe_peak_ghz") == doctest::Approx(ref.f_art).epsilon(0.05));

    RamseyOptions shortHold;
    shortHold.t_hold = 50.0;
    CHECK_THROWS_AS(ramseySignal(p, shortHold), ConfigError);
}

TEST_CASE("Stark sweep follows adiabatic following and decouples")
{
    SystemParams p;
    p.g_f = 0.106;
    p.g_q1f = 0.1;
    p.g_q2f = 0.053;
    p.nu_q2_idle = 3.5;
    StarkOptions o;
    o.nu_q2 = SweepSpec{"nu_q2", 4.9, 5.1, 2, "linear"};
    auto r = starkSweep(p, o);
    const auto& t = r.table("stark_shift");
    const double bin = 1.0 / (kZeroPadFactor * o.ramsey.tau.max);
    for (const auto& row : t.rows) CHECK(std::abs(row[3] - row[4]) < bin);
    CHECK(r.table("stark_ramsey_raw").rows.size() == 3 * 500);

    p.g_q2f = 0;
    auto z = starkSweep(p, o);
    for (double s : z.table("stark_shift").column("shift_ghz")) CHECK(std::abs(s) <= bin);
}

TEST_CASE("sweeps give the same result on any thread count")
{
    SystemParams p = iswapParams();
    HoldOptions o;
    o.t_hold = SweepSpec{"t_hold", 0.0, 30.0, 4, "linear"};
    auto a = holdSweep(p, o).table("hold_sweep").rows;
    o.threads = 3;
    auto b = holdSweep(p, o).table("hold_sweep").rows;
    CHECK(a == b);
}

TEST_CASE("sweep specs")
{
    SweepSpec lin{"x", 1.0, 2.0, 5, "linear"};
    CHECK(lin.values() == std::vector<double>{1.0, 1.25, 1.5, 1.75, 2.0});
    CHECK_THROWS_AS((SweepSpec{"x", 1.0, 2.0, 1, "linear"}).validate(), ConfigError);
    CHECK_THROWS_AS((SweepSpec{"x", 2.0, 1.0, 3, "linear"}).validate(), ConfigError);
    CHECK_THROWS_AS((SweepSpec{"x", 1.0, 2.0, 3, "log"}).validate(), ConfigError);
}

TEST_CASE("free-form evolution")
{
    SystemParams p = iswapParams();
    EvolveRunOptions o;
    o.solver.t1 = 30.0;
    o.schedule.q1 = Trajectory{p.nu_q1_idle, {Segment{5, 0, 1 / (4 * 0.0135), 0, 5.0}}};
    o.schedule.q2 = Trajectory{p.nu_q2_idle, {}};
    auto r = evolveRun(p, o);
    CHECK(r.scalar("n_q1_final") < 0.2);
    o.initial = "nope";
    CHECK_THROWS_AS(evolveRun(p, o), ConfigError);
}
