// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance            exit status 1 if any check fails
//   acceptance --ctest    exit status 1 only if a check outside the known
//                         deviations fails; those are still printed as FAIL

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "mqcavity/config.hpp"
#include "mqcavity/io.hpp"
#include "mqcavity/run.hpp"

using namespace mqc;
namespace fs = std::filesystem;

namespace {

struct Check {
    std::string what;
    bool ok = false;
    bool known = false;  // documented deviation
};

struct Criterion {
    int id = 0;
    std::string title;
    double limit_s = 0;
    std::vector<Check> checks;
    std::string detail;
    double seconds = 0;

    void check(const std::string& what, bool ok, bool known = false) { checks.push_back({what, ok, known}); }
    bool passed() const
    {
        for (const auto& c : checks)
            if (!c.ok) return false;
        return true;
    }
    bool passedOutsideKnown() const
    {
        for (const auto& c : checks)
            if (!c.ok && !c.known) return false;
        return true;
    }
};

// Invariants collected from every run below.
struct Invariants {
    RunDiagnostics diag;
    int det_total = 0;
    int det_same = 0;
    std::vector<std::string> det_failures;

    void same(const std::string& what, bool eq)
    {
        ++det_total;
        if (eq) ++det_same;
        else det_failures.push_back(what);
    }
} inv;

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...)
{
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double seconds(const std::chrono::steady_clock::time_point& t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TDHamiltonian staticTD(const Mat& h)
{
    TDHamiltonian td;
    td.static_part = h;
    return td;
}

EvolveOptions window(double t1, double dt)
{
    EvolveOptions o;
    o.t0 = 0;
    o.t1 = t1;
    o.sample_dt = dt;
    return o;
}

void noteDensity(const TimeSeries& ts)
{
    RunDiagnostics d;
    for (double tr : ts.series("trace")) d.max_trace_error = std::max(d.max_trace_error, std::abs(tr - 1.0));
    d.max_hermiticity_error = ts.max_hermiticity_error;
    inv.diag.merge(d);
}

void noteClosedN(const std::vector<double>& n)
{
    RunDiagnostics d;
    for (double v : n) d.max_excitation_drift = std::max(d.max_excitation_drift, std::abs(v - n.front()));
    inv.diag.merge(d);
}

bool sameSeries(const TimeSeries& a, const TimeSeries& b)
{
    return a.times == b.times && a.values == b.values && a.final_state == b.final_state;
}

std::string readFile(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch()
{
    static const fs::path dir = fs::temp_directory_path() / ("mqcavity-acceptance-" + std::to_string(::getpid()));
    return dir;
}

// Re-run a config through the CLI and compare each CSV with the
// in-process result byte for byte.
void cliRerun(const std::string& config, const ExperimentResult& r, const std::string& extra = "")
{
    const fs::path out = scratch() / fs::path(config).stem();
    fs::create_directories(out);
    const std::string cmd = std::string(MQCAVITY_CLI) + " " + fs::path(config).stem().string() + " --config " +
                            std::string(MQCAVITY_CONFIG_DIR) + "/" + config + " --out " + out.string() + "/" + extra +
                            " > " + (out / "stdout.txt").string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
        inv.same(config + " (cli exit " + std::to_string(rc) + ")", false);
        return;
    }
    for (const auto& t : r.tables)
        inv.same(config + ":" + t.name, readFile(out / (t.name + ".csv")) == tableToCsv(t));
}

RunConfig config(const std::string& name)
{
    return loadConfig(std::string(MQCAVITY_CONFIG_DIR) + "/" + name);
}

// ---- criteria ----

void spectroscopy(Criterion& c)
{
    SystemParams p;
    p.nu_f = 5.0;
    p.g_f = 0.135;
    double err3 = 0, err6 = 0;
    p.n_cavities = 3;
    const auto three = filterSpectrum(p).table("spectrum").column("nu_ghz");
    const double want3[] = {5.0 - std::sqrt(2.0) * 0.135, 5.0, 5.0 + std::sqrt(2.0) * 0.135};
    bool n3 = three.size() == 3;
    for (std::size_t k = 0; n3 && k < 3; ++k) err3 = std::max(err3, std::abs(three[k] - want3[k]));
    p.n_cavities = 6;
    const auto six = filterSpectrum(p).table("spectrum").column("nu_ghz");
    bool n6 = six.size() == 6;
    for (int k = 1; n6 && k <= 6; ++k) {
        const double lam = 5.0 + 2 * 0.135 * std::cos(k * M_PI / 7);
        err6 = std::max(err6, std::abs(six[6 - k] - lam));  // ascending order
    }
    c.check("n=3 levels within 1e-9 GHz", n3 && err3 <= 1e-9);
    c.check("n=6 levels within 1e-9 GHz", n6 && err6 <= 1e-9);
    inv.same("spectrum", filterSpectrum(p).table("spectrum").rows == filterSpectrum(p).table("spectrum").rows);
    c.detail = fmt("max error n=3 %.1e GHz, n=6 %.1e GHz", err3, err6);
}

void gaps(Criterion& c)
{
    SystemParams p;
    const SweepSpec sw{"nu_q", 4.9, 5.1, 2001, "linear"};
    std::vector<double> g;
    for (double k : {1.0, 3.0, 10.0}) {
        p.g_q1f = k * 0.0135;
        g.push_back(minBranchGap(p, sw, QubitSweepMode::Q1, 2));
    }
    c.check("gap(g) < gap(3g) < gap(10g)", g[0] < g[1] && g[1] < g[2]);
    inv.same("gap", minBranchGap(p, sw, QubitSweepMode::Q1, 2) == g[2]);
    c.detail = fmt("min gaps %.5f, %.5f, %.5f GHz", g[0], g[1], g[2]);
}

// one qubit (slot 0) and one mode (slot 1)
struct QubitMode {
    SpaceLayout layout{{2, 2}, {"q", "f"}};
    Mat a = embed(destroy(2), 1, layout);
    Mat sm = embed(sigmaMinus(), 0, layout);
    Mat sz = embed(sigmaZ(), 0, layout);
    Mat nq = sm.adjoint() * sm;
    Mat nf = a.adjoint() * a;

    Mat hamiltonian(double nu_q, double nu_f, double g) const
    {
        return kTwoPi * nu_f * nf + kTwoPi * nu_q * 0.5 * sz + kTwoPi * g * (a.adjoint() * sm + a * sm.adjoint());
    }
    Vec ket(int q, int f) const
    {
        Vec v = Vec::Zero(4);
        v(q * 2 + f) = 1.0;
        return v;
    }
};

void oracle(Criterion& c)
{
    QubitMode s;
    const Mat h = s.hamiltonian(5.01, 5.0, 0.0135);
    const Vec psi0 = (s.ket(1, 0) + 0.5 * s.ket(0, 1)).normalized();
    const Mat rho0 = psi0 * psi0.adjoint();
    const std::vector<std::pair<std::string, std::vector<Mat>>> sets = {
        {"lossless", {}},
        {"kappa", {std::sqrt(0.001) * s.a}},
        {"full", {std::sqrt(0.001) * s.a, std::sqrt(0.005) * s.sm, std::sqrt(0.005 / 2) * s.sz}}};
    std::string detail = "max |rho - oracle|";
    for (const auto& [name, ops] : sets) {
        TimeSeries ts = evolveLindblad(staticTD(h), rho0, ops, window(50.0, 0.5), {{"N", s.nq + s.nf}});
        const double err = maxAbs(ts.final_state - liouvillianOracle(h, ops, 50.0, rho0));
        c.check(name + " within 1e-6", err <= 1e-6);
        detail += fmt(" %s %.1e", name.c_str(), err);
        noteDensity(ts);
        if (ops.empty()) noteClosedN(ts.series("N"));
        inv.same("oracle " + name,
                 sameSeries(ts, evolveLindblad(staticTD(h), rho0, ops, window(50.0, 0.5), {{"N", s.nq + s.nf}})));
    }
    c.detail = detail;
}

void vacuumRabi(Criterion& c)
{
    QubitMode s;
    const double g = 0.0135, dt = 0.01;
    const TDHamiltonian h = staticTD(s.hamiltonian(5.0, 5.0, g));
    auto run = [&] { return evolveSchrodinger(h, s.ket(1, 0), window(60.0, dt), {{"n_q1", s.nq}, {"N", s.nq + s.nf}}); };
    TimeSeries ts = run();
    const auto& nq = ts.series("n_q1");
    std::size_t k = 1;
    while (k + 1 < nq.size() && !(nq[k] <= nq[k - 1] && nq[k] <= nq[k + 1])) ++k;
    const double y0 = nq[k - 1], y1 = nq[k], y2 = nq[k + 1];
    const double tz = ts.times[k] + dt * 0.5 * (y0 - y2) / (y0 - 2 * y1 + y2);
    const double want = 1.0 / (2 * g);
    c.check("first zero within 1% of 1/(2g)", std::abs(tz - want) <= 0.01 * want, true);
    RunDiagnostics d;
    for (double nr : ts.series("norm")) d.max_trace_error = std::max(d.max_trace_error, std::abs(nr * nr - 1.0));
    inv.diag.merge(d);
    noteClosedN(ts.series("N"));
    inv.same("vacuum rabi", sameSeries(ts, run()));
    c.detail = fmt("first zero %.3f ns, expected %.2f ns (%+.1f%%); 1/(4g) = %.2f ns (known deviation)", tz, want,
                   100 * (tz - want) / want, 1 / (4 * g));
}

void dissipation(Criterion& c)
{
    SpaceLayout l{{2}, {"f"}};
    const Mat a = destroy(2);
    Vec one = Vec::Zero(2);
    one(1) = 1;
    const double kappa = 0.001;
    EvolveOptions o = window(1000.0, 10.0);
    o.max_step = 5.0;
    auto decay = [&] {
        return evolveLindblad(staticTD(kTwoPi * 5.0 * a.adjoint() * a), QState::ket(one, l).toDensity(),
                              {std::sqrt(kappa) * a}, o, {{"n", a.adjoint() * a}});
    };
    TimeSeries ts = decay();
    const double n_end = ts.series("n").back(), want_n = std::exp(-kappa * 1000.0);
    const double rel_n = std::abs(n_end - want_n) / want_n;
    c.check("photon decay within 1e-4 relative", rel_n <= 1e-4);
    noteDensity(ts);
    inv.same("decay", sameSeries(ts, decay()));

    Vec plus(2);
    plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    const double gphi = 0.005;
    EvolveOptions od = window(400.0, 5.0);
    od.store_states = true;
    auto dephase = [&] {
        return evolveLindblad(staticTD(kTwoPi * 4.3 * 0.5 * sigmaZ()), Mat(plus * plus.adjoint()),
                              {std::sqrt(gphi / 2) * sigmaZ()}, od, {});
    };
    TimeSeries td = dephase();
    double rel_c = 0;
    for (std::size_t i = 0; i < td.times.size(); ++i) {
        const double want = 0.5 * std::exp(-gphi * td.times[i]);
        rel_c = std::max(rel_c, std::abs(std::abs(td.states[i](0, 1)) - want) / want);
    }
    c.check("dephasing within 1e-4 relative", rel_c <= 1e-4);
    noteDensity(td);
    inv.same("dephasing", sameSeries(td, dephase()));
    c.detail = fmt("n(1000 ns) rel error %.1e, coherence max rel error %.1e", rel_n, rel_c);
}

void iswap(Criterion& c)
{
    RunConfig lossless = config("iswap.json");
    lossless.losses = false;
    lossless.resolve();
    RunConfig lossy = lossless;
    lossy.losses = true;
    lossy.resolve();
    const ExperimentResult a = execute(lossless, &inv.diag);
    const ExperimentResult b = execute(lossy, &inv.diag);
    const double nq1 = a.scalar("n_q1_final"), nq2 = a.scalar("n_q2_final");
    const double fa = a.scalar("fidelity"), fb = b.scalar("fidelity");
    const double ct1 = a.scalar("concurrence_t1");
    c.check("lossless n_q1 <= 0.1 and n_q2 >= 0.7", nq1 <= 0.1 && nq2 >= 0.7);
    c.check("lossy fidelity lower by >= 0.15", fa - fb >= 0.15);
    c.check("lossless concurrence at end of t1 > 0.2", ct1 > 0.2, true);
    cliRerun("iswap.json", a, " --losses off");
    c.detail = fmt("n_q1 %.3f, n_q2 %.3f; fidelity %.3f -> %.3f; concurrence at t1 %.4f "
                   "(known deviation), at end of t2 %.3f",
                   nq1, nq2, fa, fb, ct1, a.scalar("concurrence"));
}

void landauZener(Criterion& c)
{
    const RunConfig rc = config("ramp-sweep.json");
    const ExperimentResult r = execute(rc, &inv.diag);
    const double s1 = r.scalar("amp_short_n1"), l1 = r.scalar("amp_long_n1");
    const double s6 = r.scalar("amp_short_n6"), l6 = r.scalar("amp_long_n6");
    const double p1 = r.scalar("peak_short_n1"), p3 = r.scalar("peak_short_n3"), p6 = r.scalar("peak_short_n6");
    c.check("long-ramp amplitude below short-ramp amplitude (n=1, n=6)", l1 < s1 && l6 < s6);
    c.check("short-ramp fringe peaks order n=6 < n=3 < n=1", p6 < p3 && p3 < p1);

    const RunConfig cc = config("contour.json");
    const ExperimentResult k = execute(cc, &inv.diag);
    const double m1 = k.scalar("min_load_ramp_n1"), m6 = k.scalar("min_load_ramp_n6");
    c.check("contour: n=6 loads at a shorter ramp than n=1", std::isfinite(m6) && m6 < m1);
    const int npts = rc.ramp.ramp.npoints;
    c.check("56 ramp points", npts == 56);
    cliRerun("ramp-sweep.json", r);
    cliRerun("contour.json", k);
    c.detail = fmt("amp short/long n1 %.3f/%.3f n6 %.3f/%.3f; peaks n6 %.3f n3 %.3f n1 %.3f GHz; "
                   "min load ramp n6 %g ns, n1 %g ns",
                   s1, l1, s6, l6, p6, p3, p1, m6, m1);
}

void stark(Criterion& c)
{
    const RunConfig rc = config("stark.json");
    const SystemParams& p = rc.system;
    const ExperimentResult r = execute(rc, &inv.diag);
    const Table& t = r.table("stark_shift");
    const auto nu = t.column("nu_q2");
    const auto delta = t.column("delta_ghz");
    const auto shift = t.column("shift_ghz");
    const double sat = std::sqrt(2.0) * p.g_f;
    c.check("20 x 500 sweep", nu.size() == 20 && rc.stark.ramsey.tau.npoints == 500);

    // approaching the filter from below
    bool mono = true;
    for (std::size_t i = 1; i < nu.size() && nu[i] < p.nu_f; ++i)
        if (!(std::abs(shift[i]) > std::abs(shift[i - 1]))) mono = false;
    c.check("|shift| increases as nu_q2 approaches the filter", mono);

    // two-point ratio: largest detuning against the point nearest half of it
    std::size_t far = 0, half = 0;
    for (std::size_t i = 0; i < delta.size(); ++i)
        if (delta[i] > delta[far]) far = i;
    for (std::size_t i = 0; i < delta.size(); ++i)
        if (std::abs(delta[i] - delta[far] / 2) < std::abs(delta[half] - delta[far] / 2)) half = i;
    const double want_ratio = delta[far] / delta[half];
    const double ratio = std::abs(shift[half]) / std::abs(shift[far]);
    c.check("1/Delta two-point ratio within 30%", std::abs(ratio / want_ratio - 1.0) <= 0.3, true);

    // in the band: bounded by 1.2 sqrt(2) g_F, and the last 20% of the
    // sweep sits within 20% of it and varies by less than 15%
    bool bounded = true;
    for (std::size_t i = 0; i < nu.size(); ++i)
        if (std::abs(nu[i] - p.nu_f) <= sat && std::abs(shift[i]) > 1.2 * sat) bounded = false;
    const std::size_t tail = nu.size() - nu.size() / 5;
    double lo = 1e300, hi = 0;
    for (std::size_t i = tail; i < nu.size(); ++i) {
        lo = std::min(lo, std::abs(shift[i]));
        hi = std::max(hi, std::abs(shift[i]));
    }
    const bool near = lo >= 0.8 * sat && hi <= 1.2 * sat;
    const double spread = (hi - lo) / (0.5 * (hi + lo));
    c.check("saturates within 20% of sqrt(2) g_F in the band", bounded && near && spread < 0.15);
    cliRerun("stark.json", r);
    c.detail = fmt("shift ratio %.2f vs %.2f expected (Delta %.3f / %.3f GHz, known deviation); "
                   "band tail %.4f-%.4f GHz vs sqrt(2) g_F %.4f",
                   ratio, want_ratio, delta[far], delta[half], lo, hi, sat);
}

void survival(Criterion& c)
{
    struct Tuple {
        std::vector<double> j;
        double v;
    };
    const std::vector<Tuple> tuples = {
        {{0.0135}, 0.01},          {{0.0135}, 0.1},         {{0.05}, 1.0},
        {{0.001}, 0.0001},         {{0.02, 0.01}, 0.05},    {{0.0135, 0.0135, 0.0135}, 0.02},
        {{0.03, 0.0, 0.01}, 0.3}, {{0.1, 0.05}, 2.5},      {{0.007}, 0.003},
        {{0.0}, 1.0},
    };
    double worst = 0;
    for (const auto& tp : tuples) {
        double s = 0;
        for (double j : tp.j) s += (kTwoPi * j) * (kTwoPi * j);
        const double want = std::exp(-kTwoPi * s / std::abs(kTwoPi * tp.v));
        const double got = lzSurvival(LZParams{tp.j, tp.v});
        worst = std::max(worst, std::abs(got - want) / std::max(want, 1e-300));
    }
    c.check("10 tuples to machine precision", worst <= 1e-14);

    double pw = 0;
    for (int k : {2, 3, 6}) {
        const double one = lzSurvival(LZParams{{0.02}, 0.05});
        const double many = lzSurvival(LZParams{std::vector<double>(k, 0.02), 0.05});
        pw = std::max(pw, std::abs(many - std::pow(one, k)) / many);
    }
    c.check("k equal couplings give P1^k", pw <= 1e-14);
    c.detail = fmt("max rel error %.1e, power identity %.1e", worst, pw);
}

void invariants(Criterion& c)
{
    const RunDiagnostics& d = inv.diag;
    c.check("trace <= 1e-8", d.max_trace_error <= 1e-8);
    c.check("Hermiticity <= 1e-8", d.max_hermiticity_error <= 1e-8);
    c.check("closed-system N <= 1e-8", d.max_excitation_drift <= 1e-8);
    c.check("byte-identical re-runs", inv.det_total > 0 && inv.det_same == inv.det_total);
    c.detail = fmt("trace %.1e, hermiticity %.1e, N drift %.1e, %d/%d re-runs identical", d.max_trace_error,
                   d.max_hermiticity_error, d.max_excitation_drift, inv.det_same, inv.det_total);
    for (const auto& f : inv.det_failures) c.detail += "; differs: " + f;
}

} // namespace

int main(int argc, char** argv)
{
    const bool ctest = argc > 1 && std::string(argv[1]) == "--ctest";
    std::vector<Criterion> all = {
        {1, "filter-chain spectroscopy", 1},
        {2, "avoided-crossing gap grows with coupling", 10},
        {3, "Lindblad solver vs Liouvillian oracle", 5},
        {4, "vacuum Rabi first zero", 5},
        {5, "dissipation closed forms", 10},
        {6, "iSWAP", 30},
        {7, "Landau-Zener structure", 600},
        {8, "Stark shift", 600},
        {9, "Landau-Zener survival formula", 1},
        {10, "invariants over every run", 0},
    };
    const std::vector<std::function<void(Criterion&)>> body = {spectroscopy, gaps,  oracle, vacuumRabi, dissipation,
                                                               iswap,        landauZener, stark, survival, invariants};
    bool ok = true, ok_outside_known = true;
    for (std::size_t i = 0; i < all.size(); ++i) {
        Criterion& c = all[i];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            body[i](c);
        } catch (const std::exception& e) {
            c.check(std::string("ran without error: ") + e.what(), false);
        }
        c.seconds = seconds(t0);
        if (c.limit_s > 0) c.check(fmt("runtime < %g s", c.limit_s), c.seconds < c.limit_s);

        std::string failed;
        for (const auto& k : c.checks)
            if (!k.ok) failed += (failed.empty() ? "" : "; ") + k.what + (k.known ? " [known]" : "");
        std::cout << (c.passed() ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title << ": " << c.detail
                  << fmt("; %.2f s", c.seconds);
        if (!failed.empty()) std::cout << " | failed: " << failed;
        std::cout << std::endl;
        ok = ok && c.passed();
        ok_outside_known = ok_outside_known && c.passedOutsideKnown();
    }
    std::error_code ec;
    fs::remove_all(scratch(), ec);

    int passed = 0;
    for (const auto& c : all) passed += c.passed();
    std::cout << passed << "/" << all.size() << " criteria pass";
    if (!ok && ok_outside_known) std::cout << "; every failure is a known deviation";
    std::cout << std::endl;
    return (ctest ? ok_outside_known : ok) ? 0 : 1;
}
