#include "mqcavity/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mqc {

void SweepSpec::validate() const
{
    if (scale != "linear") throw ConfigError("sweep " + parameter + ": scale must be linear");
    if (npoints < 2) throw ConfigError("sweep " + parameter + ": npoints must be >= 2");
    if (!(max > min)) throw ConfigError("sweep " + parameter + ": max must be > min");
}

std::vector<double> SweepSpec::values() const
{
    validate();
    std::vector<double> v(npoints);
    const double step = (max - min) / (npoints - 1);
    for (int i = 0; i < npoints; ++i) v[i] = i + 1 == npoints ? max : min + i * step;
    return v;
}

void Table::addRow(std::vector<double> row)
{
    if (row.size() != columns.size()) throw Error("table " + name + ": row width mismatch");
    rows.push_back(std::move(row));
}

std::vector<double> Table::column(const std::string& col) const
{
    auto it = std::find(columns.begin(), columns.end(), col);
    if (it == columns.end()) throw Error("table " + name + " has no column " + col);
    const auto k = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
}

const Table& ExperimentResult::table(const std::string& name) const
{
    for (const auto& t : tables)
        if (t.name == name) return t;
    throw Error("result has no table " + name);
}

double ExperimentResult::scalar(const std::string& key) const
{
    for (const auto& [k, v] : summary)
        if (k == key) return v;
    throw Error("result has no summary value " + key);
}

Sector makeSector(const OperatorSet& ops, int max_excitations)
{
    return Sector{excitationIsometry(ops.layout, max_excitations), max_excitations};
}

void RunDiagnostics::merge(const RunDiagnostics& o)
{
    max_trace_error = std::max(max_trace_error, o.max_trace_error);
    max_hermiticity_error = std::max(max_hermiticity_error, o.max_hermiticity_error);
    max_excitation_drift = std::max(max_excitation_drift, o.max_excitation_drift);
    max_norm_error = std::max(max_norm_error, o.max_norm_error);
    warnings += o.warnings;
}

namespace {

// ---------------------------------------------------------------------
// shared plumbing

struct Model {
    SystemParams p;
    OperatorSet ops;
    std::optional<Sector> sector;
};

Model makeModel(const SystemParams& p, Basis basis)
{
    Model m{p, buildOperators(p), std::nullopt};
    if (basis == Basis::Sector) m.sector = makeSector(m.ops, 1);
    return m;
}

Mat reduce(const Model& m, const Mat& op)
{
    return m.sector ? restrictOperator(op, m.sector->iso) : op;
}

Vec reduceKet(const Model& m, const Vec& psi)
{
    if (!m.sector) return psi;
    Vec r = m.sector->iso.adjoint() * psi;
    if (std::abs(r.norm() - psi.norm()) > 1e-12) throw Error("initial state lies outside the excitation sector");
    return r;
}

Vec toFull(const Model& m, const Vec& v)
{
    return m.sector ? m.sector->toFull(v) : v;
}

Mat toFullDensity(const Model& m, const Mat& rho)
{
    return m.sector ? m.sector->toFull(rho) : rho;
}

std::vector<Observable> standardObservables(const Model& m)
{
    std::vector<Observable> obs;
    obs.push_back({"n_q1", reduce(m, m.ops.nq[0])});
    obs.push_back({"n_q2", reduce(m, m.ops.nq[1])});
    for (int i = 0; i < m.ops.modes(); ++i)
        obs.push_back({"n_f" + std::to_string(i + 1), reduce(m, m.ops.adag[i] * m.ops.a[i])});
    obs.push_back({"N", reduce(m, m.ops.N)});
    return obs;
}

TDHamiltonian modelHamiltonian(const Model& m, const Schedule& s, const std::optional<ProbeSpec>& probe = std::nullopt)
{
    TDHamiltonian h = assembleTD(m.p, m.ops, s, probe);
    // integrate rotating with N: at nu_f, or at the probe frequency so the drive is static
    const double nu_frame = probe ? probe->nu_probe : m.p.nu_f;
    h.frame = kTwoPi * nu_frame * m.ops.N.diagonal().real();
    return m.sector ? h.restricted(m.sector->iso) : h;
}

std::vector<Mat> modelCollapse(const Model& m)
{
    std::vector<Mat> c;
    for (const auto& op : buildCollapseOps(m.p, m.ops)) c.push_back(reduce(m, op));
    return c;
}

// H for frozen qubit frequencies, in the model basis.
Mat frozenHamiltonian(const Model& m, double nu1, double nu2)
{
    Mat h = buildStaticH(m.p, m.ops) + 0.5 * kTwoPi * nu1 * m.ops.sz[0] + 0.5 * kTwoPi * nu2 * m.ops.sz[1];
    return reduce(m, h);
}

Vec productState(const OperatorSet& ops, int q1, int q2)
{
    std::vector<int> occ(ops.layout.size(), 0);
    occ.front() = q1;
    occ.back() = q2;
    Vec v = Vec::Zero(ops.dim());
    v(basisIndex(ops.layout, occ)) = 1.0;
    return v;
}

Trajectory idle(double base)
{
    return Trajectory{base, {}};
}

RunDiagnostics diagnose(const TimeSeries& ts, bool density, bool closed)
{
    RunDiagnostics d;
    if (density) {
        for (double tr : ts.series("trace")) d.max_trace_error = std::max(d.max_trace_error, std::abs(tr - 1.0));
        d.max_hermiticity_error = ts.max_hermiticity_error;
    } else {
        for (double nr : ts.series("norm")) {
            d.max_norm_error = std::max(d.max_norm_error, std::abs(nr - 1.0));
            d.max_trace_error = std::max(d.max_trace_error, std::abs(nr * nr - 1.0));
        }
    }
    if (closed) {
        const auto& n = ts.series("N");
        for (double v : n) d.max_excitation_drift = std::max(d.max_excitation_drift, std::abs(v - n.front()));
    }
    d.warnings = ts.warnings.size();
    return d;
}

void report(RunDiagnostics* out, const RunDiagnostics& d)
{
    if (out) out->merge(d);
}

int centerMode(const SystemParams& p, int requested)
{
    if (requested > 0) return requested;
    return (p.n_cavities + 1) / 2;
}

// Overlap of bare filter mode k (ascending) with a chain site (0-based).
double modeOverlap(const SystemParams& p, int k, int site)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(filterBlock(p));
    return std::abs(es.eigenvectors()(site, k - 1));
}

std::size_t nearestIndex(const std::vector<double>& times, double t)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
    return best;
}

double twoQubitConcurrence(const OperatorSet& ops, const Mat& full_state)
{
    QState s{full_state.cols() == 1 ? QState::Kind::Ket : QState::Kind::Density, full_state, ops.layout};
    QState red = ptrace(s, {0, ops.layout.size() - 1});
    return concurrence(red.data);
}

double windowRange(const std::vector<double>& x, const std::vector<double>& v, double lo, double hi)
{
    double mn = 1e300, mx = -1e300;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo - 1e-9 || x[i] > hi + 1e-9) continue;
        mn = std::min(mn, v[i]);
        mx = std::max(mx, v[i]);
    }
    return mx >= mn ? mx - mn : 0.0;
}

} // namespace

// ---------------------------------------------------------------------
// spectroscopy

ExperimentResult filterSpectrum(const SystemParams& p, const std::optional<SweepSpec>& g_f_sweep)
{
    ExperimentResult r;
    r.kind = "spectrum";
    Table t{"spectrum", {"g_f", "k", "nu_ghz", "closed_form_ghz"}, {}};
    std::vector<double> gs = g_f_sweep ? g_f_sweep->values() : std::vector<double>{p.g_f};
    const int n = p.n_cavities;
    for (double g : gs) {
        SystemParams q = p;
        q.g_f = g;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(filterBlock(q), Eigen::EigenvaluesOnly);
        for (int k = 1; k <= n; ++k) t.addRow({g, double(k), es.eigenvalues()(k - 1), resonanceTarget(q, k)});
    }
    r.tables.push_back(std::move(t));
    double worst = 0.0;
    for (const auto& row : r.tables[0].rows) worst = std::max(worst, std::abs(row[2] - row[3]));
    r.summary.push_back({"max_closed_form_error_ghz", worst});
    return r;
}

namespace {

std::vector<double> branches(const SystemParams& p, double nu, QubitSweepMode mode)
{
    double nu2 = mode == QubitSweepMode::Both ? nu : p.nu_q2_idle;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(singleExcitationBlock(p, nu, nu2), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

} // namespace

ExperimentResult qubitFilterSpectrum(const SystemParams& p, const SweepSpec& nu_sweep, QubitSweepMode mode)
{
    ExperimentResult r;
    r.kind = "qubit-spectrum";
    Table t{"qubit_spectrum", {"nu_q", "branch", "nu_ghz"}, {}};
    for (double nu : nu_sweep.values()) {
        auto b = branches(p, nu, mode);
        for (std::size_t k = 0; k < b.size(); ++k) t.addRow({nu, double(k), b[k]});
    }
    r.tables.push_back(std::move(t));
    return r;
}

double minBranchGap(const SystemParams& p, const SweepSpec& nu_sweep, QubitSweepMode mode, int lower)
{
    double gap = 1e300;
    for (double nu : nu_sweep.values()) {
        auto b = branches(p, nu, mode);
        if (lower < 0 || lower + 1 >= static_cast<int>(b.size())) throw Error("branch index out of range");
        gap = std::min(gap, b[lower + 1] - b[lower]);
    }
    return gap;
}

// ---------------------------------------------------------------------
// iSWAP

ISwapTimes iswapTimes(const SystemParams& p, const ISwapOptions& o)
{
    ISwapTimes t;
    const int k = centerMode(p, o.mode_index);
    t.nu_mode = resonanceTarget(p, k);
    const double g1 = p.g_q1f * modeOverlap(p, k, 0);
    const double g2 = p.g_q2f * modeOverlap(p, k, p.n_cavities - 1);
    t.g_eff = g1;
    if (o.timing == ISwapTiming::Literal) {
        t.t1 = p.g_q1f > 0 ? 1.0 / (4.0 * p.g_q1f) : 0.0;
        t.t2 = p.g_q2f > 0 ? 1.0 / (2.0 * p.g_q2f) : 0.0;
    } else {
        t.t1 = g1 > 0 ? 1.0 / (4.0 * g1) : 0.0;
        t.t2 = g2 > 0 ? 1.0 / (2.0 * g2) : 0.0;
    }
    return t;
}

ExperimentResult runISwap(const SystemParams& p, const ISwapOptions& o, RunDiagnostics* diag)
{
    const ISwapTimes tm = iswapTimes(p, o);
    // decoupled qubits still get a finite window
    const double t1 = p.g_q1f > 0 ? tm.t1 : 1.0 / (4.0 * 0.0135);
    const double t2 = p.g_q2f > 0 ? tm.t2 : 1.0 / (2.0 * 0.0135);
    const double end_t1 = o.t_offset1 + t1;
    const double end_t2 = o.t_offset2 + t2;

    Model m = makeModel(p, o.basis);
    Schedule s;
    s.q1 = Trajectory{p.nu_q1_idle, {Segment{o.t_offset1, 0.0, t1, 0.0, tm.nu_mode, Shape::Linear}}};
    s.q2 = Trajectory{p.nu_q2_idle, {Segment{o.t_offset2, 0.0, t2, 0.0, tm.nu_mode, Shape::Linear}}};
    s.q1.validate();
    s.q2.validate();
    TDHamiltonian h = modelHamiltonian(m, s);
    auto obs = standardObservables(m);

    EvolveOptions eo = o.solver;
    eo.t0 = 0.0;
    eo.t1 = end_t2 + o.tail;
    eo.store_states = true;

    const Vec psi0 = productState(m.ops, 1, 0);
    const Vec target = productState(m.ops, 0, 1);
    TimeSeries ts;
    if (o.with_losses) {
        Vec r0 = reduceKet(m, psi0);
        ts = evolveLindblad(h, Mat(r0 * r0.adjoint()), modelCollapse(m), eo, obs);
    } else {
        ts = evolveSchrodinger(h, reduceKet(m, psi0), eo, obs);
    }
    report(diag, diagnose(ts, o.with_losses, !o.with_losses));

    std::vector<std::string> cols{"t_ns"};
    for (const auto& n : ts.names) cols.push_back(n);
    cols.push_back("concurrence");
    cols.push_back("fidelity");
    Table t{"iswap", cols, {}};
    std::vector<double> conc(ts.times.size()), fid(ts.times.size());
    for (std::size_t i = 0; i < ts.times.size(); ++i) {
        Mat full = o.with_losses ? toFullDensity(m, ts.states[i]) : Mat(toFull(m, ts.states[i].col(0)));
        conc[i] = twoQubitConcurrence(m.ops, full);
        fid[i] = stateFidelity(full, target);
        std::vector<double> row{ts.times[i]};
        for (const auto& v : ts.values) row.push_back(v[i]);
        row.push_back(conc[i]);
        row.push_back(fid[i]);
        t.addRow(std::move(row));
    }

    // the sample grid is uniform; take the closest samples to the gate marks
    const std::size_t i1 = nearestIndex(ts.times, end_t1);
    const std::size_t i2 = nearestIndex(ts.times, end_t2);
    ExperimentResult r;
    r.kind = "iswap";
    r.tables.push_back(std::move(t));
    r.summary = {{"fidelity", fid[i2]},
                 {"concurrence", conc[i2]},
                 {"concurrence_t1", conc[i1]},
                 {"max_concurrence", *std::max_element(conc.begin(), conc.end())},
                 {"n_q1_final", ts.series("n_q1").back()},
                 {"n_q2_final", ts.series("n_q2").back()},
                 {"t1_ns", t1},
                 {"t2_ns", t2},
                 {"g_eff_ghz", tm.g_eff},
                 {"nu_mode_ghz", tm.nu_mode}};
    return r;
}

// ---------------------------------------------------------------------
// hold-time sweep

ExperimentResult holdSweep(const SystemParams& p, const HoldOptions& o, RunDiagnostics* diag)
{
    const double target = resonanceTarget(p, centerMode(p, o.mode_index));
    const Model m = makeModel(p, Basis::Sector);
    const auto obs = standardObservables(m);
    const auto c_ops = o.with_losses ? modelCollapse(m) : std::vector<Mat>{};
    const Vec psi0 = reduceKet(m, productState(m.ops, 1, 0));
    const auto holds = o.t_hold.values();

    struct Point {
        TimeSeries ts;
        double final_n = 0;
    };
    auto pts = orderedMap<Point>(static_cast<int>(holds.size()), o.threads, [&](int i) {
        const double th = holds[i];
        Schedule s;
        s.q1 = Trajectory{p.nu_q1_idle, {Segment{o.t_offset, o.dt_ramp, th, o.dt_ramp, target, o.shape}}};
        s.q2 = idle(p.nu_q2_idle);
        s.q1.validate();
        TDHamiltonian h = modelHamiltonian(m, s);
        EvolveOptions eo = o.solver;
        eo.t0 = 0;
        eo.t1 = o.t_offset + 2 * o.dt_ramp + th + o.tail;
        Point pt;
        pt.ts = o.with_losses ? evolveLindblad(h, Mat(psi0 * psi0.adjoint()), c_ops, eo, obs)
                              : evolveSchrodinger(h, psi0, eo, obs);
        const auto& nq = pt.ts.series("n_q1");
        double acc = 0;
        int cnt = 0;
        for (std::size_t k = 0; k < nq.size(); ++k)
            if (pt.ts.times[k] >= eo.t1 - o.settle - 1e-9) {
                acc += nq[k];
                ++cnt;
            }
        pt.final_n = acc / cnt;
        return pt;
    });

    ExperimentResult r;
    r.kind = "hold-sweep";
    Table fin{"hold_sweep", {"t_hold", "n_q1_final"}, {}};
    Table ser{"hold_sweep_series", {"t_hold", "t_ns", "n_q1"}, {}};
    for (std::size_t i = 0; i < holds.size(); ++i) {
        report(diag, diagnose(pts[i].ts, o.with_losses, !o.with_losses));
        fin.addRow({holds[i], pts[i].final_n});
        const auto& nq = pts[i].ts.series("n_q1");
        for (std::size_t k = 0; k < nq.size(); ++k) ser.addRow({holds[i], pts[i].ts.times[k], nq[k]});
    }
    auto f = fin.column("n_q1_final");
    r.summary = {{"n_q1_final_min", *std::min_element(f.begin(), f.end())},
                 {"n_q1_final_max", *std::max_element(f.begin(), f.end())},
                 {"nu_target_ghz", target}};
    r.tables.push_back(std::move(fin));
    r.tables.push_back(std::move(ser));
    return r;
}

// ---------------------------------------------------------------------
// ramp sweep

double RampOptions::top(const SystemParams& p) const
{
    return nu_top ? *nu_top : p.nu_f + 2.0 * p.g_f + top_margin;
}

TimeSeries rampRun(const SystemParams& p, int n_cavities, double ramp, const RampOptions& o, Basis basis)
{
    if (ramp < 0 || 2 * ramp > o.period + 1e-12) throw ConfigError("ramp time must lie in [0, period/2]");
    SystemParams q = p;
    q.n_cavities = n_cavities;
    const Model m = makeModel(q, basis);
    Schedule s;
    const double hold = std::max(0.0, o.period - 2 * ramp);
    s.q1 = Trajectory{q.nu_q1_idle, {Segment{0.0, ramp, hold, ramp, o.top(q), o.shape}}};
    s.q2 = idle(q.nu_q2_idle);
    s.q1.validate();
    TDHamiltonian h = modelHamiltonian(m, s);
    EvolveOptions eo = o.solver;
    eo.t0 = 0;
    eo.t1 = o.period + o.tail;
    return evolveSchrodinger(h, reduceKet(m, productState(m.ops, 1, 0)), eo, standardObservables(m));
}

namespace {

struct RampGrid {
    std::vector<int> cavities;
    std::vector<double> ramps;
    std::vector<TimeSeries> runs;  // cavity-major

    const TimeSeries& at(std::size_t c, std::size_t r) const { return runs[c * ramps.size() + r]; }
};

RampGrid rampGrid(const SystemParams& p, const RampOptions& o, RunDiagnostics* diag)
{
    RampGrid g{o.cavities, o.ramp.values(), {}};
    const int nr = static_cast<int>(g.ramps.size());
    const int total = static_cast<int>(g.cavities.size()) * nr;
    g.runs = orderedMap<TimeSeries>(total, o.threads,
                                    [&](int i) { return rampRun(p, g.cavities[i / nr], g.ramps[i % nr], o); });
    for (const auto& ts : g.runs) report(diag, diagnose(ts, false, true));
    return g;
}

// min over the pulse window and value at its end
std::pair<double, double> pulseStats(const TimeSeries& ts, double period)
{
    const auto& nq = ts.series("n_q1");
    double mn = 1e300;
    for (std::size_t k = 0; k < nq.size(); ++k)
        if (ts.times[k] <= period + 1e-9) mn = std::min(mn, nq[k]);
    return {mn, nq[nearestIndex(ts.times, period)]};
}

double minLoadingRamp(const RampGrid& g, std::size_t c, const RampOptions& o)
{
    for (std::size_t r = 0; r < g.ramps.size(); ++r)
        if (pulseStats(g.at(c, r), o.period).first <= o.load_threshold) return g.ramps[r];
    return std::numeric_limits<double>::infinity();
}

} // namespace

ExperimentResult rampSweep(const SystemParams& p, const RampOptions& o, RunDiagnostics* diag)
{
    const RampGrid g = rampGrid(p, o, diag);
    const double dr = g.ramps[1] - g.ramps[0];

    ExperimentResult r;
    r.kind = "ramp-sweep";
    Table end{"ramp_sweep", {"n_cavities", "ramp", "n_q1_end", "n_q1_min"}, {}};
    Table post{"ramp_sweep_post", {"n_cavities", "ramp", "t_ns", "n_q1"}, {}};
    Table fft{"ramp_fft", {"n_cavities", "window", "freq_ghz", "magnitude"}, {}};

    for (std::size_t c = 0; c < g.cavities.size(); ++c) {
        const double nc = g.cavities[c];
        std::vector<double> ends, short_v, long_v;
        for (std::size_t k = 0; k < g.ramps.size(); ++k) {
            const TimeSeries& ts = g.at(c, k);
            auto [mn, e] = pulseStats(ts, o.period);
            ends.push_back(e);
            end.addRow({nc, g.ramps[k], e, mn});
            const auto& nq = ts.series("n_q1");
            for (std::size_t i = 0; i < nq.size(); ++i)
                if (ts.times[i] >= o.period - 1e-9) post.addRow({nc, g.ramps[k], ts.times[i], nq[i]});
            if (g.ramps[k] <= o.split + 1e-9) short_v.push_back(e);
            if (g.ramps[k] >= o.split - 1e-9) long_v.push_back(e);
        }
        const std::string tag = "_n" + std::to_string(g.cavities[c]);
        if (short_v.size() >= 8) {
            Spectrum sp = fftSpectrum(short_v, dr);
            for (std::size_t k = 0; k < sp.freqs.size(); ++k) fft.addRow({nc, 0.0, sp.freqs[k], sp.magnitudes[k]});
            r.summary.push_back({"peak_short" + tag, peakFrequency(sp, o.fmin)});
        }
        if (long_v.size() >= 8) {
            Spectrum sp = fftSpectrum(long_v, dr);
            for (std::size_t k = 0; k < sp.freqs.size(); ++k) fft.addRow({nc, 1.0, sp.freqs[k], sp.magnitudes[k]});
        }
        r.summary.push_back({"amp_short" + tag, windowRange(g.ramps, ends, g.ramps.front(), o.amp_short_to)});
        r.summary.push_back({"amp_long" + tag, windowRange(g.ramps, ends, o.amp_long_from, g.ramps.back())});
        r.summary.push_back({"min_load_ramp" + tag, minLoadingRamp(g, c, o)});
    }
    r.summary.push_back({"nu_top_ghz", o.top(p)});
    r.tables.push_back(std::move(end));
    r.tables.push_back(std::move(post));
    r.tables.push_back(std::move(fft));
    return r;
}

ExperimentResult loadingContour(const SystemParams& p, const RampOptions& o, RunDiagnostics* diag)
{
    const RampGrid g = rampGrid(p, o, diag);
    ExperimentResult r;
    r.kind = "contour";
    Table t{"contour", {"n_cavities", "ramp", "t_ns", "n_q1"}, {}};
    for (std::size_t c = 0; c < g.cavities.size(); ++c) {
        for (std::size_t k = 0; k < g.ramps.size(); ++k) {
            const TimeSeries& ts = g.at(c, k);
            const auto& nq = ts.series("n_q1");
            for (std::size_t i = 0; i < nq.size(); ++i)
                if (ts.times[i] <= o.period + 1e-9) t.addRow({double(g.cavities[c]), g.ramps[k], ts.times[i], nq[i]});
        }
        r.summary.push_back({"min_load_ramp_n" + std::to_string(g.cavities[c]), minLoadingRamp(g, c, o)});
    }
    r.tables.push_back(std::move(t));
    return r;
}

// ---------------------------------------------------------------------
// probe scan

ExperimentResult probeScan(const SystemParams& p, const ProbeOptions& o, RunDiagnostics* diag)
{
    if (!(o.omega_p >= 0)) throw ConfigError("omega_p must be >= 0");
    if (!(o.duration > 0)) throw ConfigError("duration must be > 0");
    const Model m = makeModel(p, Basis::Full);
    const auto obs = standardObservables(m);
    const auto nus = o.nu.values();
    const Vec psi0 = productState(m.ops, 0, 0);
    Schedule s{idle(p.nu_q1_idle), idle(p.nu_q2_idle)};

    auto resp = orderedMap<std::pair<double, RunDiagnostics>>(static_cast<int>(nus.size()), o.threads, [&](int i) {
        TDHamiltonian h = modelHamiltonian(m, s, ProbeSpec{o.omega_p, nus[i]});
        EvolveOptions eo = o.solver;
        eo.t0 = 0;
        eo.t1 = o.duration;
        TimeSeries ts = evolveSchrodinger(h, psi0, eo, obs);
        const auto& nq = ts.series("n_q1");
        double acc = 0;
        for (double v : nq) acc += v;
        return std::make_pair(acc / nq.size(), diagnose(ts, false, false));
    });

    ExperimentResult r;
    r.kind = "probe";
    Table t{"probe", {"nu_probe", "response"}, {}};
    std::size_t best = 0;
    for (std::size_t i = 0; i < nus.size(); ++i) {
        report(diag, resp[i].second);
        t.addRow({nus[i], resp[i].first});
        if (resp[i].first > resp[best].first) best = i;
    }
    r.tables.push_back(std::move(t));
    r.summary = {{"peak_nu_ghz", nus[best]}, {"peak_response", resp[best].first}};
    return r;
}

// ---------------------------------------------------------------------
// Ramsey / Stark

double RamseyOptions::q1Top(const SystemParams& p) const
{
    return nu_q1_top ? *nu_q1_top : filterBandTop(p) + top_margin_gf * p.g_f;
}

double RamseyOptions::holdTime() const
{
    return t_hold ? *t_hold : lead + 2.0 * q2_ramp + tau.max + 5.0;
}

namespace {

struct RamseyPlan {
    double t_q1 = 0;      // q1 ramp start
    double t_hold_end = 0;
    double t_q2 = 0;      // q2 ramp start
    double t_end = 0;
    double top = 0;

    Schedule schedule(const SystemParams& p, const RamseyOptions& o, double tau) const
    {
        Schedule s;
        s.q1 = Trajectory{p.nu_q1_idle, {Segment{t_q1, o.dt_ramp, o.holdTime(), o.dt_ramp, top, Shape::Linear}}};
        s.q2 = Trajectory{p.nu_q2_idle, {Segment{t_q2, o.q2_ramp, tau, o.q2_ramp, o.nu_q2, o.q2_shape}}};
        return s;
    }
};

RamseyPlan planRamsey(const SystemParams& p, const RamseyOptions& o)
{
    RamseyPlan pl;
    pl.t_q1 = o.t_pre;
    pl.t_hold_end = o.t_pre + o.dt_ramp + o.holdTime();
    pl.t_q2 = o.t_pre + o.dt_ramp + o.lead;
    pl.t_end = pl.t_hold_end + o.dt_ramp + o.t_post;
    pl.top = o.q1Top(p);
    if (o.tau.min < 0) throw ConfigError("tau must be >= 0");
    if (pl.t_q2 + 2 * o.q2_ramp + o.tau.max > pl.t_hold_end + 1e-9)
        throw ConfigError("t_hold is too short for the q2 pulse and tau window");
    return pl;
}

double measureAfterPulse(const OperatorSet& ops, const Mat& full_state, double phi)
{
    Mat u = pulseUnitary(ops.layout, phi, std::numbers::pi / 2, 1);
    if (full_state.cols() == 1) {
        Vec out = u * full_state.col(0);
        return expectKet(ops.nq[0], out);
    }
    Mat rho = u * full_state * u.adjoint();
    return expectDensity(ops.nq[0], rho);
}

double finalPhase(const RamseyOptions& o, double tau)
{
    return std::numbers::pi / 2 + kTwoPi * o.f_art * tau;
}

} // namespace

std::vector<double> ramseySignal(const SystemParams& p, const RamseyOptions& o, RunDiagnostics* diag)
{
    const RamseyPlan pl = planRamsey(p, o);
    const Model m = makeModel(p, Basis::Sector);
    const auto taus = o.tau.values();

    // step 1: q1 in (|g> + |e>)/sqrt(2)
    QState g0 = QState::ket(productState(m.ops, 0, 0), m.ops.layout);
    const Vec psi_prep = reduceKet(m, applyInstantPulse(g0, Axis::Y, std::numbers::pi / 2, 1).data.col(0));

    if (o.method == RamseyMethod::Direct || o.with_losses) {
        const auto obs = standardObservables(m);
        const auto c_ops = o.with_losses ? modelCollapse(m) : std::vector<Mat>{};
        auto out = orderedMap<std::pair<double, RunDiagnostics>>(
            static_cast<int>(taus.size()), o.threads, [&](int i) {
                TDHamiltonian h = modelHamiltonian(m, pl.schedule(p, o, taus[i]));
                EvolveOptions eo = o.solver;
                eo.t0 = 0;
                eo.t1 = pl.t_end;
                eo.sample_dt = pl.t_end;  // only endpoints are needed
                TimeSeries ts = o.with_losses
                                    ? evolveLindblad(h, Mat(psi_prep * psi_prep.adjoint()), c_ops, eo, obs)
                                    : evolveSchrodinger(h, psi_prep, eo, obs);
                Mat full = o.with_losses ? toFullDensity(m, ts.final_state) : Mat(toFull(m, ts.final_state.col(0)));
                return std::make_pair(measureAfterPulse(m.ops, full, finalPhase(o, taus[i])),
                                      diagnose(ts, o.with_losses, !o.with_losses));
            });
        std::vector<double> sig;
        for (auto& [v, d] : out) {
            report(diag, d);
            sig.push_back(v);
        }
        return sig;
    }

    // Closed system: every tau shares the same propagators except the
    // plateau of q2 and the remaining q1 hold, which are exact exponentials.
    EvolveOptions eo = o.solver;
    const TDHamiltonian h0 = modelHamiltonian(m, pl.schedule(p, o, 0.0));
    const Mat u_a = propagator(h0, 0.0, pl.t_q2, eo);
    const Mat u_up = propagator(h0, pl.t_q2, pl.t_q2 + o.q2_ramp, eo);
    const Mat u_dn = propagator(h0, pl.t_q2 + o.q2_ramp, pl.t_q2 + 2 * o.q2_ramp, eo);
    const Mat u_end = propagator(h0, pl.t_hold_end, pl.t_end, eo);
    const HermEig e_top = hermEig(frozenHamiltonian(m, pl.top, o.nu_q2));
    const HermEig e_idle = hermEig(frozenHamiltonian(m, pl.top, p.nu_q2_idle));
    const Vec psi_b = u_up * (u_a * psi_prep);
    const Mat n_op = reduce(m, m.ops.N);
    const double n0 = expectKet(n_op, psi_prep);

    auto out = orderedMap<std::pair<double, RunDiagnostics>>(static_cast<int>(taus.size()), o.threads, [&](int i) {
        const double tau = taus[i];
        const double rest = pl.t_hold_end - (pl.t_q2 + 2 * o.q2_ramp + tau);
        Vec psi = expmHermitian(e_top, tau) * psi_b;
        psi = u_dn * psi;
        psi = expmHermitian(e_idle, rest) * psi;
        psi = u_end * psi;
        RunDiagnostics d;
        d.max_norm_error = std::abs(psi.norm() - 1.0);
        d.max_trace_error = std::abs(psi.squaredNorm() - 1.0);
        d.max_excitation_drift = std::abs(expectKet(n_op, psi) - n0);
        return std::make_pair(measureAfterPulse(m.ops, Mat(toFull(m, psi)), finalPhase(o, tau)), d);
    });
    std::vector<double> sig;
    for (auto& [v, d] : out) {
        report(diag, d);
        sig.push_back(v);
    }
    return sig;
}

ExperimentResult ramseyRun(const SystemParams& p, const RamseyOptions& o, RunDiagnostics* diag)
{
    const auto taus = o.tau.values();
    const auto sig = ramseySignal(p, o, diag);
    ExperimentResult r;
    r.kind = "ramsey";
    Table t{"ramsey", {"tau", "n_q1"}, {}};
    for (std::size_t i = 0; i < taus.size(); ++i) t.addRow({taus[i], sig[i]});
    r.tables.push_back(std::move(t));
    Spectrum sp = fftSpectrum(sig, taus[1] - taus[0]);
    r.summary = {{"fringe_peak_ghz", peakFrequency(sp, 0.0)}, {"t_hold_ns", o.holdTime()}};
    return r;
}

double adiabaticStarkShift(const SystemParams& p, const RamseyOptions& o, double nu_q2)
{
    const double top = o.q1Top(p);
    auto level = [&](double nu2) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(singleExcitationBlock(p, top, nu2), Eigen::EigenvaluesOnly);
        return es.eigenvalues()(1);
    };
    return level(nu_q2) - level(p.nu_q2_idle);
}

ExperimentResult starkSweep(const SystemParams& p, const StarkOptions& o, RunDiagnostics* diag)
{
    const auto taus = o.ramsey.tau.values();
    const double dtau = taus[1] - taus[0];
    const auto nus = o.nu_q2.values();

    RamseyOptions ref = o.ramsey;
    ref.nu_q2 = p.nu_q2_idle;
    const auto ref_sig = ramseySignal(p, ref, diag);
    const double f0 = peakFrequency(fftSpectrum(ref_sig, dtau), o.fmin);

    ExperimentResult r;
    r.kind = "stark";
    Table shift{"stark_shift", {"nu_q2", "delta_ghz", "peak_ghz", "shift_ghz", "adiabatic_shift_ghz"}, {}};
    Table raw{"stark_ramsey_raw", {"nu_q2", "reference", "tau", "n_q1"}, {}};
    for (std::size_t k = 0; k < taus.size(); ++k) raw.addRow({ref.nu_q2, 1.0, taus[k], ref_sig[k]});

    for (double nu : nus) {
        RamseyOptions ro = o.ramsey;
        ro.nu_q2 = nu;
        const auto sig = ramseySignal(p, ro, diag);
        const double peak = peakFrequency(fftSpectrum(sig, dtau), o.fmin);
        shift.addRow({nu, p.nu_f - nu, peak, peak - f0, adiabaticStarkShift(p, ro, nu)});
        for (std::size_t k = 0; k < taus.size(); ++k) raw.addRow({nu, 0.0, taus[k], sig[k]});
    }
    auto sh = shift.column("shift_ghz");
    double mx = 0;
    for (double v : sh) mx = std::max(mx, std::abs(v));
    r.summary = {{"baseline_f0_ghz", f0},
                 {"max_abs_shift_ghz", mx},
                 {"sqrt2_g_f_ghz", std::sqrt(2.0) * p.g_f},
                 {"t_hold_ns", o.ramsey.holdTime()}};
    r.tables.push_back(std::move(shift));
    r.tables.push_back(std::move(raw));
    return r;
}

// ---------------------------------------------------------------------
// free-form evolution

ExperimentResult evolveRun(const SystemParams& p, const EvolveRunOptions& o, RunDiagnostics* diag)
{
    const Basis basis = o.probe ? Basis::Full : o.basis;
    const Model m = makeModel(p, basis);
    Schedule s = o.schedule;
    s.q1.validate();
    s.q2.validate();
    TDHamiltonian h = modelHamiltonian(m, s, o.probe);
    const auto obs = standardObservables(m);

    Vec psi0;
    if (o.initial == "ground") {
        psi0 = productState(m.ops, 0, 0);
    } else if (o.initial == "q1") {
        psi0 = productState(m.ops, 1, 0);
    } else if (o.initial == "q2") {
        psi0 = productState(m.ops, 0, 1);
    } else if (o.initial == "q1-plus") {
        QState g0 = QState::ket(productState(m.ops, 0, 0), m.ops.layout);
        psi0 = applyInstantPulse(g0, Axis::Y, std::numbers::pi / 2, 1).data.col(0);
    } else {
        throw ConfigError("unknown initial state \"" + o.initial + "\"");
    }
    const Vec r0 = reduceKet(m, psi0);
    const bool lossy = o.with_losses;
    TimeSeries ts = lossy ? evolveLindblad(h, Mat(r0 * r0.adjoint()), modelCollapse(m), o.solver, obs)
                          : evolveSchrodinger(h, r0, o.solver, obs);
    report(diag, diagnose(ts, lossy, !lossy && !o.probe));

    ExperimentResult r;
    r.kind = "evolve";
    std::vector<std::string> cols{"t_ns"};
    for (const auto& n : ts.names) cols.push_back(n);
    Table t{"evolve", cols, {}};
    for (std::size_t i = 0; i < ts.times.size(); ++i) {
        std::vector<double> row{ts.times[i]};
        for (const auto& v : ts.values) row.push_back(v[i]);
        t.addRow(std::move(row));
    }
    r.tables.push_back(std::move(t));
    r.summary = {{"n_q1_final", ts.series("n_q1").back()}, {"n_q2_final", ts.series("n_q2").back()}};
    return r;
}

} // namespace mqc
