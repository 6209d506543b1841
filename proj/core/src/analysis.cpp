#include "mqcavity/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>

#include <fftw3.h>

namespace mqc {

namespace {

// FFTW's planner is not reentrant
std::mutex& plannerMutex()
{
    static std::mutex m;
    return m;
}

} // namespace

Spectrum fftSpectrum(const std::vector<double>& values, double dt)
{
    const int n = static_cast<int>(values.size());
    if (n < 8) throw Error("series too short for a spectrum (need >= 8 points)");
    if (!(dt > 0)) throw Error("sample spacing must be > 0");
    for (double v : values)
        if (!std::isfinite(v)) throw Error("series contains non-finite values");

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;

    const int m = kZeroPadFactor * n;
    const int nout = m / 2 + 1;
    double* in = fftw_alloc_real(m);
    fftw_complex* out = fftw_alloc_complex(nout);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plannerMutex());
        plan = fftw_plan_dft_r2c_1d(m, in, out, FFTW_ESTIMATE);
    }
    for (int i = 0; i < m; ++i) in[i] = i < n ? values[i] - mean : 0.0;
    fftw_execute(plan);

    Spectrum s;
    s.freqs.resize(nout);
    s.magnitudes.resize(nout);
    for (int k = 0; k < nout; ++k) {
        s.freqs[k] = k / (m * dt);
        s.magnitudes[k] = std::hypot(out[k][0], out[k][1]) / n;
    }
    {
        std::lock_guard<std::mutex> lock(plannerMutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return s;
}

double peakFrequency(const Spectrum& spec, double fmin)
{
    if (spec.freqs.empty() || spec.freqs.size() != spec.magnitudes.size()) throw Error("empty spectrum");
    const std::size_t n = spec.freqs.size();
    std::size_t best = n;
    for (std::size_t k = 0; k < n; ++k) {
        if (spec.freqs[k] < fmin) continue;
        if (best == n || spec.magnitudes[k] > spec.magnitudes[best]) best = k;
    }
    if (best == n) throw Error("no spectrum bin at or above fmin");
    if (best == 0 || best + 1 >= n) return spec.freqs[best];
    double a = spec.magnitudes[best - 1], b = spec.magnitudes[best], c = spec.magnitudes[best + 1];
    double denom = a - 2 * b + c;
    if (denom == 0.0) return spec.freqs[best];
    double p = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
    double df = spec.freqs[best + 1] - spec.freqs[best];
    return spec.freqs[best] + p * df;
}

double concurrence(const Mat& rho)
{
    if (rho.rows() != 4 || rho.cols() != 4) throw DimensionError("concurrence needs a 4x4 density matrix");
    if (hermiticityError(rho) > 1e-8) throw Error("concurrence: state is not Hermitian");
    if (std::abs(rho.trace() - cplx(1.0)) > 1e-8) throw Error("concurrence: trace is not 1");
    Mat yy = kron(sigmaY(), sigmaY());
    Mat r = rho * yy * rho.conjugate() * yy;
    Eigen::ComplexEigenSolver<Mat> es(r, false);
    std::vector<double> lam;
    double scale = std::max(1e-300, maxAbs(r));
    for (int i = 0; i < 4; ++i) {
        cplx ev = es.eigenvalues()(i);
        if (std::abs(ev.imag()) > 1e-9 * std::max(1.0, scale))
            throw SolverError("concurrence: spin-flip eigenvalue has an imaginary part");
        lam.push_back(std::sqrt(std::max(0.0, ev.real())));
    }
    std::sort(lam.begin(), lam.end(), std::greater<>());
    return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

double stateFidelity(const Mat& rho, const Vec& target)
{
    if (target.size() != rho.rows()) throw DimensionError("fidelity: dimension mismatch");
    if (rho.cols() == 1) return std::norm(target.dot(rho.col(0)));
    if (rho.cols() != rho.rows()) throw DimensionError("fidelity: state must be a ket or square");
    return target.dot(rho * target).real();
}

double stateFidelity(const QState& rho, const QState& target)
{
    if (!target.isKet()) throw Error("fidelity target must be a pure state");
    return stateFidelity(rho.data, Vec(target.data.col(0)));
}

double lzSurvival(const LZParams& p)
{
    if (!(p.velocity > 0)) throw Error("LZ velocity must be > 0");
    const double vw = kTwoPi * p.velocity;
    double sum = 0.0;
    for (double j : p.couplings) {
        if (j < 0) throw Error("LZ couplings must be >= 0");
        const double jw = kTwoPi * j;
        sum += jw * jw;
    }
    return std::exp(-kTwoPi * sum / vw);
}

} // namespace mqc
