#include "mqcavity/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace mqc {

void EvolveOptions::validate() const
{
    if (!(t1 > t0)) throw ConfigError("t1 must be > t0");
    if (!(sample_dt > 0)) throw ConfigError("sample_dt must be > 0");
    if (!(rtol > 0)) throw ConfigError("rtol must be > 0");
    if (!(atol > 0)) throw ConfigError("atol must be > 0");
    if (!(max_step > 0)) throw ConfigError("max_step must be > 0");
}

std::vector<double> sampleGrid(double t0, double t1, double dt)
{
    std::vector<double> g;
    const double span = t1 - t0;
    const auto n = static_cast<long long>(std::floor(span / dt + 1e-9));
    for (long long i = 0; i <= n; ++i) g.push_back(std::min(t0 + static_cast<double>(i) * dt, t1));
    if (t1 - g.back() > 1e-9 * std::max(1.0, dt)) g.push_back(t1);
    return g;
}

const std::vector<double>& TimeSeries::series(const std::string& name) const
{
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values[i];
    throw Error("no series named " + name);
}

namespace {

// H(t) applied to a block of columns; diagonal terms take a fast path.
class HamiltonianAction {
public:
    explicit HamiltonianAction(const TDHamiltonian& h) : static_part_(h.static_part)
    {
        for (const auto& term : h.terms) {
            Mat off = term.op;
            off.diagonal().setZero();
            Entry e;
            e.coeff = term.coeff;
            e.diagonal = maxAbs(off) == 0.0;
            if (e.diagonal)
                e.diag = term.op.diagonal();
            else
                e.op = term.op;
            entries_.push_back(std::move(e));
        }
    }

    void apply(double t, const Mat& y, Mat& out) const
    {
        out.noalias() = static_part_ * y;
        for (const auto& e : entries_) {
            cplx c = e.coeff(t);
            if (c == cplx(0.0)) continue;
            if (e.diagonal)
                out.noalias() += (c * e.diag).asDiagonal() * y;
            else
                out.noalias() += c * (e.op * y);
        }
    }

private:
    struct Entry {
        std::function<cplx(double)> coeff;
        bool diagonal = false;
        Vec diag;
        Mat op;
    };
    Mat static_part_;
    std::vector<Entry> entries_;
};

const cplx kMinusI(0.0, -1.0);

// Rotating frame generated by a diagonal F. Every operator must shift F
// by a single amount d (d = 0 for the static part); terms pick up the
// phase exp(i d (t - t0)) and samples are rotated back with
// exp(-i F (t - t0)). Kets come back up to a global phase.
class Frame {
public:
    Frame(const TDHamiltonian& h, const std::vector<Mat>& c_ops, double t0) : f_(h.frame), t0_(t0)
    {
        if (f_.size() == 0) return;
        if (f_.size() != h.dim()) throw DimensionError("frame generator does not match Hamiltonian");
        if (shift(h.static_part) != 0.0)
            throw Error("static Hamiltonian does not commute with the rotating-frame generator");
        for (const auto& term : h.terms) shifts_.push_back(shift(term.op));
        for (const auto& c : c_ops) shift(c);
    }

    bool active() const { return f_.size() > 0; }

    TDHamiltonian shifted(const TDHamiltonian& h) const
    {
        TDHamiltonian out = h;
        out.frame.resize(0);
        if (!active()) return out;
        // the trace part only moves the global phase, so it is dropped as well
        const double dim = static_cast<double>(out.dim());
        out.static_part.diagonal() -= f_.cast<cplx>();
        out.static_part.diagonal().array() -= out.static_part.trace() / dim;
        for (std::size_t k = 0; k < out.terms.size(); ++k) {
            const double d = shifts_[k];
            if (d == 0.0) {
                out.terms[k].op.diagonal().array() -= out.terms[k].op.trace() / dim;
                continue;
            }
            auto c = out.terms[k].coeff;
            const double t0 = t0_;
            out.terms[k].coeff = [c, d, t0](double t) { return c(t) * std::exp(cplx(0.0, d * (t - t0))); };
        }
        return out;
    }

    Vec phases(double t) const
    {
        Vec ph(f_.size());
        for (Eigen::Index i = 0; i < f_.size(); ++i) ph(i) = std::exp(cplx(0.0, -f_(i) * (t - t0_)));
        return ph;
    }

    // rotating -> lab
    Mat toLabKet(double t, const Mat& y) const
    {
        if (!active()) return y;
        return phases(t).asDiagonal() * y;
    }
    Mat toLabDensity(double t, const Mat& y) const
    {
        if (!active()) return y;
        Vec ph = phases(t);
        return ph.asDiagonal() * y * ph.conjugate().asDiagonal();
    }

private:
    // Common F_i - F_j over the nonzero entries of op; 0 for a zero matrix.
    double shift(const Mat& op) const
    {
        const double tol = 1e-14 * std::max(1.0, maxAbs(op));
        const double ftol = 1e-9 * std::max(1.0, f_.cwiseAbs().maxCoeff());
        std::optional<double> d;
        for (Eigen::Index j = 0; j < op.cols(); ++j)
            for (Eigen::Index i = 0; i < op.rows(); ++i) {
                if (std::abs(op(i, j)) <= tol) continue;
                const double dij = f_(i) - f_(j);
                if (!d)
                    d = dij;
                else if (std::abs(dij - *d) > ftol)
                    throw Error("operator is not compatible with the rotating frame");
            }
        if (!d || std::abs(*d) <= ftol) return 0.0;
        return *d;
    }

    RVec f_;
    double t0_;
    std::vector<double> shifts_;
};

} // namespace

TimeSeries evolveSchrodinger(const TDHamiltonian& h, const Vec& psi0, const EvolveOptions& opts,
                             const std::vector<Observable>& observables)
{
    opts.validate();
    if (psi0.size() != h.dim()) throw DimensionError("initial state does not match Hamiltonian");
    for (const auto& ob : observables)
        if (ob.op.rows() != h.dim()) throw DimensionError("observable " + ob.name + " has wrong dimension");

    const Frame frame(h, {}, opts.t0);
    HamiltonianAction act(frame.shifted(h));
    OdeRhs rhs = [&act](double t, const Mat& y, Mat& dy) {
        act.apply(t, y, dy);
        dy *= kMinusI;
    };

    TimeSeries ts;
    ts.times = sampleGrid(opts.t0, opts.t1, opts.sample_dt);
    for (const auto& ob : observables) ts.names.push_back(ob.name);
    ts.names.push_back("norm");
    ts.values.assign(ts.names.size(), std::vector<double>(ts.times.size()));
    if (opts.store_states) ts.states.resize(ts.times.size());

    OdeSampler sampler = [&](std::size_t i, double t, const Mat& y) {
        Vec psi = frame.toLabKet(t, y).col(0);
        for (std::size_t k = 0; k < observables.size(); ++k) ts.values[k][i] = expectKet(observables[k].op, psi);
        ts.values.back()[i] = psi.norm();
        if (opts.store_states) ts.states[i] = psi;
    };
    Mat y0 = psi0;
    Mat fin = odeIntegrate(rhs, y0, opts.t0, opts.t1, h.breakpoints, ts.times, sampler, opts.control(), &ts.stats);
    ts.final_state = frame.toLabKet(opts.t1, fin);
    return ts;
}

TimeSeries evolveSchrodinger(const TDHamiltonian& h, const QState& psi0, const EvolveOptions& opts,
                             const std::vector<Observable>& observables)
{
    if (!psi0.isKet()) throw Error("evolveSchrodinger needs a pure state");
    return evolveSchrodinger(h, Vec(psi0.data.col(0)), opts, observables);
}

TimeSeries evolveLindblad(const TDHamiltonian& h, const Mat& rho0, const std::vector<Mat>& c_ops,
                          const EvolveOptions& opts, const std::vector<Observable>& observables)
{
    opts.validate();
    const int d = h.dim();
    if (rho0.rows() != d || rho0.cols() != d) throw DimensionError("initial state does not match Hamiltonian");
    for (const auto& c : c_ops)
        if (c.rows() != d || c.cols() != d) throw DimensionError("collapse operator has wrong dimension");
    for (const auto& ob : observables)
        if (ob.op.rows() != d) throw DimensionError("observable " + ob.name + " has wrong dimension");

    const Frame frame(h, c_ops, opts.t0);
    HamiltonianAction act(frame.shifted(h));
    Mat half_l = Mat::Zero(d, d);
    for (const auto& c : c_ops) half_l += 0.5 * (c.adjoint() * c);
    std::vector<Mat> c_adj;
    for (const auto& c : c_ops) c_adj.push_back(c.adjoint());

    Mat hr(d, d);
    OdeRhs rhs = [&](double t, const Mat& rho, Mat& drho) {
        act.apply(t, rho, hr);
        // X = -i H_eff rho with H_eff = H - (i/2) sum c^dag c
        hr = kMinusI * hr;
        hr.noalias() -= half_l * rho;
        drho = hr + hr.adjoint();
        for (std::size_t k = 0; k < c_ops.size(); ++k) drho.noalias() += c_ops[k] * rho * c_adj[k];
    };

    TimeSeries ts;
    ts.times = sampleGrid(opts.t0, opts.t1, opts.sample_dt);
    for (const auto& ob : observables) ts.names.push_back(ob.name);
    ts.names.push_back("trace");
    ts.names.push_back("purity");
    ts.values.assign(ts.names.size(), std::vector<double>(ts.times.size()));
    if (opts.store_states) ts.states.resize(ts.times.size());

    const std::size_t nobs = observables.size();
    OdeSampler sampler = [&](std::size_t i, double t, const Mat& yr) {
        const Mat y = frame.toLabDensity(t, yr);
        double herr = hermiticityError(y);
        ts.max_hermiticity_error = std::max(ts.max_hermiticity_error, herr);
        if (herr > 1e-8) throw SolverError("density matrix lost Hermiticity at t = " + std::to_string(t));
        Mat rho = 0.5 * (y + y.adjoint());
        for (std::size_t k = 0; k < nobs; ++k) ts.values[k][i] = expectDensity(observables[k].op, rho);
        ts.values[nobs][i] = rho.trace().real();
        ts.values[nobs + 1][i] = (rho.cwiseProduct(rho.transpose())).sum().real();
        if (opts.check_positivity) {
            Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
            double mn = es.eigenvalues().minCoeff();
            if (mn < -1e-6)
                ts.warnings.push_back("density matrix eigenvalue " + std::to_string(mn) + " at t = " +
                                      std::to_string(t));
        }
        if (opts.store_states) ts.states[i] = rho;
    };
    Mat fin = odeIntegrate(rhs, rho0, opts.t0, opts.t1, h.breakpoints, ts.times, sampler, opts.control(), &ts.stats);
    fin = frame.toLabDensity(opts.t1, fin);
    ts.final_state = 0.5 * (fin + fin.adjoint());
    return ts;
}

TimeSeries evolveLindblad(const TDHamiltonian& h, const QState& rho0, const std::vector<Mat>& c_ops,
                          const EvolveOptions& opts, const std::vector<Observable>& observables)
{
    return evolveLindblad(h, rho0.toDensity(), c_ops, opts, observables);
}

Mat propagator(const TDHamiltonian& h, double t0, double t1, const EvolveOptions& opts)
{
    const int d = h.dim();
    if (t1 == t0) return Mat::Identity(d, d);
    const Frame frame(h, {}, t0);
    HamiltonianAction act(frame.shifted(h));
    OdeRhs rhs = [&act](double t, const Mat& y, Mat& dy) {
        act.apply(t, y, dy);
        dy *= kMinusI;
    };
    return frame.toLabKet(t1, odeIntegrate(rhs, Mat::Identity(d, d), t0, t1, h.breakpoints, {}, {}, opts.control()));
}

Mat liouvillianOracle(const Mat& h_static, const std::vector<Mat>& c_ops, double t, const Mat& rho0)
{
    const auto d = h_static.rows();
    if (d > kOracleDimensionCap) throw DimensionError("liouvillianOracle is limited to dimension 16");
    if (rho0.rows() != d) throw DimensionError("state does not match Hamiltonian");
    if (t == 0.0) return rho0;
    const Mat id = Mat::Identity(d, d);
    // column-stacking: vec(A X B) = (B^T kron A) vec(X)
    Mat lv = kMinusI * (kron(id, h_static) - kron(h_static.transpose(), id));
    for (const auto& c : c_ops) {
        Mat cdc = c.adjoint() * c;
        lv += kron(c.conjugate(), c) - 0.5 * kron(id, cdc) - 0.5 * kron(cdc.transpose(), id);
    }
    Mat prop = expm(lv * t);
    Vec v = Eigen::Map<const Vec>(rho0.data(), d * d);
    Vec out = prop * v;
    return Eigen::Map<const Mat>(out.data(), d, d);
}

QState liouvillianOracle(const Mat& h_static, const std::vector<Mat>& c_ops, double t, const QState& rho0)
{
    Mat r = liouvillianOracle(h_static, c_ops, t, rho0.toDensity());
    return QState{QState::Kind::Density, r, rho0.layout};
}

namespace {

Mat rotation(const Mat& sigma, double angle)
{
    return std::cos(angle / 2) * Mat::Identity(2, 2) + kMinusI * std::sin(angle / 2) * sigma;
}

int qubitSlot(const SpaceLayout& layout, int qubit)
{
    if (qubit == 1) return 0;
    if (qubit == 2) return layout.size() - 1;
    throw Error("qubit must be 1 or 2");
}

QState applyUnitary(const QState& state, const Mat& u)
{
    QState out = state;
    if (state.isKet())
        out.data = u * state.data;
    else
        out.data = u * state.data * u.adjoint();
    return out;
}

} // namespace

Mat pulseUnitary(const SpaceLayout& layout, double phi, double angle, int qubit)
{
    Mat sigma = std::cos(phi) * sigmaX() + std::sin(phi) * sigmaY();
    return embed(rotation(sigma, angle), qubitSlot(layout, qubit), layout);
}

QState applyInstantPulse(const QState& state, Axis axis, double angle, int qubit)
{
    const Mat sigma = axis == Axis::X ? sigmaX() : sigmaY();
    return applyUnitary(state, embed(rotation(sigma, angle), qubitSlot(state.layout, qubit), state.layout));
}

QState applyInstantPulse(const QState& state, double phi, double angle, int qubit)
{
    return applyUnitary(state, pulseUnitary(state.layout, phi, angle, qubit));
}

} // namespace mqc
