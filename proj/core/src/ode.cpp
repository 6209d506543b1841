#include "mqcavity/ode.hpp"

#include <algorithm>
#include <cmath>

namespace mqc {

namespace {

// Dormand & Prince coefficients, dense output after Hairer's DOPRI5
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kSafe = 0.9;
constexpr double kFacMin = 0.2;   // largest shrink is 1/5
constexpr double kFacMax = 10.0;  // largest growth
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;

double errorNorm(const Mat& err, const Mat& y0, const Mat& y1, const StepControl& ctl)
{
    double acc = 0.0;
    const Eigen::Index n = err.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        double sc = ctl.atol + ctl.rtol * std::max(std::abs(y0.data()[i]), std::abs(y1.data()[i]));
        double r = std::abs(err.data()[i]) / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

double initialStep(const OdeRhs& rhs, double t0, const Mat& y0, const Mat& f0, double span, const StepControl& ctl,
                   OdeStats& st)
{
    Eigen::ArrayXXd sc = ctl.atol + ctl.rtol * y0.cwiseAbs().array();
    double dnf = 0, dny = 0;
    for (Eigen::Index i = 0; i < y0.size(); ++i) {
        double s = sc.data()[i];
        dnf += std::norm(f0.data()[i]) / (s * s);
        dny += std::norm(y0.data()[i]) / (s * s);
    }
    const double n = static_cast<double>(y0.size());
    dnf /= n;
    dny /= n;
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min({h, ctl.max_step, span});
    Mat y1 = y0 + h * f0;
    Mat f1(y0.rows(), y0.cols());
    rhs(t0 + h, y1, f1);
    ++st.rhs_calls;
    double der2 = 0;
    for (Eigen::Index i = 0; i < y0.size(); ++i) {
        double s = sc.data()[i];
        der2 += std::norm(f1.data()[i] - f0.data()[i]) / (s * s);
    }
    der2 = std::sqrt(der2 / n) / h;
    double der12 = std::max(der2, std::sqrt(dnf));
    double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100 * h, h1, ctl.max_step, span});
}

} // namespace

Mat odeIntegrate(const OdeRhs& rhs, const Mat& y0, double t0, double t1, const std::vector<double>& breakpoints,
                 const std::vector<double>& sample_times, const OdeSampler& sampler, const StepControl& ctl,
                 OdeStats* stats)
{
    if (!(t1 >= t0)) throw SolverError("integration interval is reversed");
    if (!(ctl.rtol > 0) || !(ctl.atol > 0) || !(ctl.max_step > 0)) throw SolverError("tolerances must be > 0");
    OdeStats local;
    OdeStats& st = stats ? *stats : local;

    std::vector<double> stops;
    for (double b : breakpoints)
        if (b > t0 && b < t1) stops.push_back(b);
    stops.push_back(t1);
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

    std::size_t next_sample = 0;
    const std::size_t nsamples = sample_times.size();
    auto emitUpTo = [&](double t_hi, const auto& value_at) {
        while (next_sample < nsamples && sample_times[next_sample] <= t_hi) {
            sampler(next_sample, sample_times[next_sample], value_at(sample_times[next_sample]));
            ++next_sample;
        }
    };

    Mat y = y0;
    // samples at (or before) the start
    emitUpTo(t0, [&](double) -> const Mat& { return y; });
    if (t1 == t0) return y;

    const auto rows = y0.rows(), cols = y0.cols();
    Mat k1(rows, cols), k2(rows, cols), k3(rows, cols), k4(rows, cols), k5(rows, cols), k6(rows, cols),
        k7(rows, cols), ytmp(rows, cols), ynew(rows, cols), err(rows, cols);
    Mat r1, r2, r3, r4, r5;

    double t = t0;
    double h = ctl.first_step;
    double facold = 1e-4;

    // Coefficients may jump at a stop, so the ends of each interval are
    // evaluated just inside it (one-sided limits).
    auto inside = [](double x) { return 1e-12 * std::max(1.0, std::abs(x)); };

    for (double stop : stops) {
        const double span = stop - t;
        if (span <= 0) continue;
        rhs(t + std::min(inside(t), 0.5 * span), y, k1);
        ++st.rhs_calls;
        if (h <= 0) h = initialStep(rhs, t, y, k1, span, ctl, st);
        bool last = false;
        bool rejected_prev = false;
        while (!last) {
            h = std::min(h, ctl.max_step);
            if (t + h >= stop - 1e-12 * std::max(1.0, std::abs(stop))) {
                h = stop - t;
                last = true;
            }
            if (h < 1e-13 * std::max(1.0, std::abs(t)))
                throw SolverError("step size underflow at t = " + std::to_string(t));

            ytmp = y + h * a21 * k1;
            rhs(t + c2 * h, ytmp, k2);
            ytmp = y + h * (a31 * k1 + a32 * k2);
            rhs(t + c3 * h, ytmp, k3);
            ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
            rhs(t + c4 * h, ytmp, k4);
            ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            rhs(t + c5 * h, ytmp, k5);
            ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            const double tph = last ? stop : t + h;
            const double tev = last ? stop - std::min(inside(stop), 0.5 * h) : tph;
            rhs(tev, ytmp, k6);
            ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            rhs(tev, ynew, k7);
            st.rhs_calls += 6;
            err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            double en = errorNorm(err, y, ynew, ctl);
            if (!std::isfinite(en)) throw SolverError("non-finite state during integration");

            double fac11 = std::pow(std::max(en, 1e-300), kExpo);
            if (en <= 1.0) {
                double fac = fac11 / std::pow(facold, kBeta);
                fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
                double hnew = h / fac;
                if (rejected_prev) hnew = std::min(hnew, h);
                facold = std::max(en, 1e-4);
                ++st.accepted;

                if (next_sample < nsamples && sample_times[next_sample] <= tph) {
                    r1 = y;
                    r2 = ynew - y;
                    r3 = h * k1 - r2;
                    r4 = r2 - h * k7 - r3;
                    r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                    const double tstart = t;
                    emitUpTo(tph, [&](double ts) -> Mat {
                        if (ts >= tph) return ynew;
                        double th = (ts - tstart) / h, th1 = 1.0 - th;
                        return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
                    });
                }
                y = ynew;
                t = tph;
                k1 = k7;
                h = hnew;
                rejected_prev = false;
            } else {
                h = h / std::min(1.0 / kFacMin, fac11 / kSafe);
                ++st.rejected;
                rejected_prev = true;
                last = false;
            }
        }
    }
    emitUpTo(t1 + 1e300, [&](double) -> const Mat& { return y; });
    return y;
}

} // namespace mqc
