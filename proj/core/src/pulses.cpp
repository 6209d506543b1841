#include "mqcavity/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mqc {

Shape parseShape(const std::string& s)
{
    if (s == "linear") return Shape::Linear;
    if (s == "raised-cosine") return Shape::RaisedCosine;
    throw ConfigError("unknown ramp shape \"" + s + "\" (expected linear or raised-cosine)");
}

std::string shapeName(Shape s)
{
    return s == Shape::Linear ? "linear" : "raised-cosine";
}

void Trajectory::validate() const
{
    if (!(base > 0)) throw ConfigError("trajectory base must be > 0");
    double prev_end = -1e300;
    for (const auto& s : segments) {
        if (s.t_start < 0 || s.ramp_up < 0 || s.hold < 0 || s.ramp_down < 0)
            throw ConfigError("segment durations and start must be >= 0");
        if (!(s.target > 0)) throw ConfigError("segment target must be > 0");
        if (s.t_start < prev_end) throw ConfigError("segments must be time-ordered and non-overlapping");
        prev_end = s.end();
    }
}

namespace {

double shapeFraction(Shape shape, double x)
{
    if (shape == Shape::Linear) return x;
    return 0.5 * (1.0 - std::cos(std::numbers::pi * x));
}

} // namespace

double evalTrajectory(const Trajectory& traj, double t)
{
    for (const auto& s : traj.segments) {
        if (t < s.t_start) break;
        double up_end = s.t_start + s.ramp_up;
        double hold_end = up_end + s.hold;
        if (t > s.end()) continue;
        if (t < up_end) return traj.base + (s.target - traj.base) * shapeFraction(s.shape, (t - s.t_start) / s.ramp_up);
        if (t <= hold_end) return s.target;
        if (s.ramp_down <= 0) return traj.base;
        return s.target + (traj.base - s.target) * shapeFraction(s.shape, (t - hold_end) / s.ramp_down);
    }
    return traj.base;
}

std::vector<double> trajectoryBreakpoints(const Trajectory& traj)
{
    std::vector<double> b;
    for (const auto& s : traj.segments) {
        b.push_back(s.t_start);
        b.push_back(s.t_start + s.ramp_up);
        b.push_back(s.t_start + s.ramp_up + s.hold);
        b.push_back(s.end());
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

Mat TDHamiltonian::at(double t) const
{
    Mat h = static_part;
    for (const auto& term : terms) h += term.coeff(t) * term.op;
    return h;
}

Mat restrictOperator(const Mat& op, const Mat& iso)
{
    Mat image = op * iso;
    Mat reduced = iso.adjoint() * image;
    double leak = maxAbs(image - iso * reduced);
    if (leak > 1e-12 * std::max(1.0, maxAbs(op)))
        throw Error("operator does not leave the chosen subspace invariant");
    return reduced;
}

TDHamiltonian TDHamiltonian::restricted(const Mat& iso) const
{
    TDHamiltonian out;
    out.static_part = restrictOperator(static_part, iso);
    for (const auto& term : terms) out.terms.push_back({restrictOperator(term.op, iso), term.coeff});
    out.breakpoints = breakpoints;
    if (frame.size() > 0) {
        Mat f = restrictOperator(Mat(frame.cast<cplx>().asDiagonal()), iso);
        out.frame = f.diagonal().real();
    }
    return out;
}

TDHamiltonian assembleTD(const SystemParams& p, const OperatorSet& ops, const Schedule& schedule,
                         const std::optional<ProbeSpec>& probe)
{
    TDHamiltonian h;
    h.static_part = buildStaticH(p, ops);
    const Trajectory q1 = schedule.q1;
    const Trajectory q2 = schedule.q2;
    h.terms.push_back({0.5 * ops.sz[0], [q1](double t) { return cplx(kTwoPi * evalTrajectory(q1, t)); }});
    h.terms.push_back({0.5 * ops.sz[1], [q2](double t) { return cplx(kTwoPi * evalTrajectory(q2, t)); }});
    if (probe) {
        auto probe_terms = buildProbeTerms(probe->omega_p, probe->nu_probe, ops);
        h.terms.insert(h.terms.end(), probe_terms.begin(), probe_terms.end());
    }
    auto b1 = trajectoryBreakpoints(q1);
    auto b2 = trajectoryBreakpoints(q2);
    h.breakpoints = b1;
    h.breakpoints.insert(h.breakpoints.end(), b2.begin(), b2.end());
    std::sort(h.breakpoints.begin(), h.breakpoints.end());
    h.breakpoints.erase(std::unique(h.breakpoints.begin(), h.breakpoints.end()), h.breakpoints.end());
    return h;
}

double resonanceTarget(const SystemParams& p, int k)
{
    const int n = p.n_cavities;
    if (k < 1 || k > n) throw ConfigError("mode index out of range");
    // cos(k pi/(n+1)) descends with k, so mirror the index for ascending order
    int j = n + 1 - k;
    return p.nu_f + 2.0 * p.g_f * std::cos(j * std::numbers::pi / (n + 1));
}

double filterBandTop(const SystemParams& p)
{
    return resonanceTarget(p, p.n_cavities);
}

} // namespace mqc
