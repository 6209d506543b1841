#include "mqcavity/model.hpp"

#include <cmath>
#include <string>

namespace mqc {

namespace {

void requirePositive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be > 0");
}

void requireNonNegative(double v, const char* name)
{
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be >= 0");
}

} // namespace

void SystemParams::validate(bool allow_zero_couplings) const
{
    if (n_cavities < 1 || n_cavities > 8) throw ConfigError("n_cavities must be in [1, 8]");
    if (fock_levels < 2) throw ConfigError("fock_levels must be >= 2");
    requirePositive(nu_f, "nu_f");
    requirePositive(nu_q1_idle, "nu_q1_idle");
    requirePositive(nu_q2_idle, "nu_q2_idle");
    if (allow_zero_couplings) {
        requireNonNegative(g_f, "g_f");
        requireNonNegative(g_q1f, "g_q1f");
        requireNonNegative(g_q2f, "g_q2f");
    } else {
        requirePositive(g_f, "g_f");
        requirePositive(g_q1f, "g_q1f");
        requirePositive(g_q2f, "g_q2f");
    }
    requireNonNegative(kappa, "kappa");
    requireNonNegative(gamma, "gamma");
    requireNonNegative(gamma_phi, "gamma_phi");
}

SpaceLayout makeLayout(const SystemParams& p)
{
    SpaceLayout lay;
    lay.dims.push_back(2);
    lay.labels.push_back("q1");
    for (int i = 1; i <= p.n_cavities; ++i) {
        lay.dims.push_back(p.fock_levels);
        lay.labels.push_back("f" + std::to_string(i));
    }
    lay.dims.push_back(2);
    lay.labels.push_back("q2");
    return lay;
}

OperatorSet buildOperators(const SystemParams& p, int dimension_cap)
{
    p.validate(true);
    OperatorSet ops;
    ops.layout = makeLayout(p);
    // guard before allocating anything large
    double total = 4.0 * std::pow(static_cast<double>(p.fock_levels), p.n_cavities);
    if (total > dimension_cap)
        throw DimensionError("total dimension " + std::to_string(static_cast<long long>(total)) +
                             " exceeds cap " + std::to_string(dimension_cap));

    const Mat a = destroy(p.fock_levels);
    for (int i = 1; i <= p.n_cavities; ++i) {
        ops.a.push_back(embed(a, i, ops.layout));
        ops.adag.push_back(ops.a.back().adjoint());
    }
    for (int q = 0; q < 2; ++q) {
        int slot = ops.qubitSlot(q + 1);
        ops.sz[q] = embed(sigmaZ(), slot, ops.layout);
        ops.sp[q] = embed(sigmaPlus(), slot, ops.layout);
        ops.sm[q] = embed(sigmaMinus(), slot, ops.layout);
        ops.nq[q] = ops.sp[q] * ops.sm[q];
    }
    ops.N = ops.nq[0] + ops.nq[1];
    for (int i = 0; i < p.n_cavities; ++i) ops.N += ops.adag[i] * ops.a[i];
    return ops;
}

Mat buildStaticH(const SystemParams& p, const OperatorSet& ops)
{
    const int n = ops.modes();
    Mat h = Mat::Zero(ops.dim(), ops.dim());
    for (int i = 0; i < n; ++i) h += kTwoPi * p.nu_f * (ops.adag[i] * ops.a[i]);
    for (int i = 1; i < n; ++i)
        h += kTwoPi * p.g_f * (ops.adag[i] * ops.a[i - 1] + ops.adag[i - 1] * ops.a[i]);
    h += kTwoPi * p.g_q1f * (ops.adag[0] * ops.sm[0] + ops.a[0] * ops.sp[0]);
    h += kTwoPi * p.g_q2f * (ops.adag[n - 1] * ops.sm[1] + ops.a[n - 1] * ops.sp[1]);
    return h;
}

std::vector<Mat> buildCollapseOps(const SystemParams& p, const OperatorSet& ops)
{
    std::vector<Mat> c;
    if (p.kappa > 0)
        for (const auto& a : ops.a) c.push_back(std::sqrt(p.kappa) * a);
    if (p.gamma > 0)
        for (int q = 0; q < 2; ++q) c.push_back(std::sqrt(p.gamma) * ops.sm[q]);
    if (p.gamma_phi > 0)
        for (int q = 0; q < 2; ++q) c.push_back(std::sqrt(p.gamma_phi / 2.0) * ops.sz[q]);
    return c;
}

std::vector<TDTerm> buildProbeTerms(double omega_p, double nu_probe, const OperatorSet& ops)
{
    if (omega_p < 0) throw ConfigError("omega_p must be >= 0");
    const double w = kTwoPi * nu_probe;
    std::vector<TDTerm> terms;
    terms.push_back({-omega_p * ops.sp[0], [w](double t) { return std::exp(cplx(0.0, -w * t)); }});
    terms.push_back({-omega_p * ops.sm[0], [w](double t) { return std::exp(cplx(0.0, w * t)); }});
    return terms;
}

Eigen::MatrixXd filterBlock(const SystemParams& p)
{
    const int n = p.n_cavities;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) b(i, i) = p.nu_f;
    for (int i = 1; i < n; ++i) b(i, i - 1) = b(i - 1, i) = p.g_f;
    return b;
}

Eigen::MatrixXd singleExcitationBlock(const SystemParams& p, double nu_q1, double nu_q2)
{
    const int n = p.n_cavities;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n + 2, n + 2);
    b.block(1, 1, n, n) = filterBlock(p);
    b(0, 0) = nu_q1;
    b(n + 1, n + 1) = nu_q2;
    b(0, 1) = b(1, 0) = p.g_q1f;
    b(n, n + 1) = b(n + 1, n) = p.g_q2f;
    return b;
}

int basisIndex(const SpaceLayout& layout, const std::vector<int>& occupation)
{
    if (static_cast<int>(occupation.size()) != layout.size()) throw DimensionError("occupation length mismatch");
    int idx = 0;
    for (int i = 0; i < layout.size(); ++i) {
        if (occupation[i] < 0 || occupation[i] >= layout.dims[i]) throw DimensionError("occupation out of range");
        idx = idx * layout.dims[i] + occupation[i];
    }
    return idx;
}

Mat excitationIsometry(const SpaceLayout& layout, int max_excitations)
{
    const int total = layout.total();
    std::vector<int> keep;
    for (int full = 0; full < total; ++full) {
        int rem = full, count = 0;
        for (int i = layout.size() - 1; i >= 0; --i) {
            count += rem % layout.dims[i];
            rem /= layout.dims[i];
        }
        if (count <= max_excitations) keep.push_back(full);
    }
    Mat iso = Mat::Zero(total, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) iso(keep[k], static_cast<Eigen::Index>(k)) = 1.0;
    return iso;
}

} // namespace mqc
