#include "mqcavity/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mqc {

int SpaceLayout::total() const
{
    int n = 1;
    for (int d : dims) n *= d;
    return n;
}

void SpaceLayout::validate() const
{
    if (dims.empty()) throw DimensionError("layout has no subsystems");
    if (!labels.empty() && labels.size() != dims.size())
        throw DimensionError("layout labels do not match dims");
    for (int d : dims)
        if (d < 2) throw DimensionError("subsystem dimension must be >= 2");
}

QState QState::ket(const Vec& psi, const SpaceLayout& layout)
{
    if (psi.size() != layout.total())
        throw DimensionError("ket length does not match layout");
    if (std::abs(psi.norm() - 1.0) > 1e-10) throw Error("ket is not normalized");
    return QState{Kind::Ket, psi, layout};
}

QState QState::density(const Mat& rho, const SpaceLayout& layout)
{
    if (rho.rows() != layout.total() || rho.cols() != layout.total())
        throw DimensionError("density matrix does not match layout");
    if (hermiticityError(rho) > 1e-10) throw Error("density matrix is not Hermitian");
    if (std::abs(rho.trace() - cplx(1.0)) > 1e-10) throw Error("density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) throw Error("density matrix is not positive");
    return QState{Kind::Density, rho, layout};
}

Mat QState::toDensity() const
{
    if (kind == Kind::Density) return data;
    return data * data.adjoint();
}

double maxAbs(const Mat& a)
{
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

double hermiticityError(const Mat& a)
{
    if (a.rows() != a.cols()) throw DimensionError("matrix is not square");
    return maxAbs(a - a.adjoint());
}

bool isHermitian(const Mat& a, double rel_tol)
{
    if (a.rows() != a.cols()) return false;
    double scale = maxAbs(a);
    return hermiticityError(a) <= rel_tol * scale;
}

Mat identity(int n)
{
    return Mat::Identity(n, n);
}

Mat kron(const Mat& a, const Mat& b)
{
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Mat embed(const Mat& op, int slot, const SpaceLayout& layout)
{
    if (slot < 0 || slot >= layout.size()) throw DimensionError("slot out of range");
    if (op.rows() != layout.dims[slot] || op.cols() != layout.dims[slot])
        throw DimensionError("operator dimension does not match subsystem " + std::to_string(slot));
    int left = 1, right = 1;
    for (int i = 0; i < slot; ++i) left *= layout.dims[i];
    for (int i = slot + 1; i < layout.size(); ++i) right *= layout.dims[i];
    return kron(identity(left), kron(op, identity(right)));
}

HermEig hermEig(const Mat& h)
{
    if (h.rows() != h.cols()) throw DimensionError("hermEig needs a square matrix");
    if (!isHermitian(h)) throw Error("hermEig: matrix is not Hermitian");
    Mat sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    if (es.info() != Eigen::Success) throw SolverError("hermEig did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

namespace {

double norm1(const Mat& a)
{
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

} // namespace

Mat expm(const Mat& a)
{
    if (a.rows() != a.cols()) throw DimensionError("expm needs a square matrix");
    const auto n = a.rows();
    if (n == 0) return a;
    if (maxAbs(a) == 0.0) return Mat::Identity(n, n);

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    double nrm = norm1(a);
    int s = 0;
    if (nrm > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / theta13))));
    Mat x = a / std::ldexp(1.0, s);

    Mat id = Mat::Identity(n, n);
    Mat x2 = x * x;
    Mat x4 = x2 * x2;
    Mat x6 = x4 * x2;
    Mat u = x * (x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id);
    Mat v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
    Mat r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < s; ++k) r = r * r;
    return r;
}

Mat expmHermitian(const HermEig& eig, double t)
{
    Vec phase(eig.values.size());
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) phase(k) = std::exp(cplx(0.0, -eig.values(k) * t));
    return eig.vectors * phase.asDiagonal() * eig.vectors.adjoint();
}

Mat expmHermitian(const Mat& h, double t)
{
    return expmHermitian(hermEig(h), t);
}

QState ptrace(const QState& state, const std::vector<int>& keep)
{
    const SpaceLayout& lay = state.layout;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] < 0 || keep[i] >= lay.size()) throw DimensionError("ptrace: invalid subsystem index");
        if (i > 0 && keep[i] <= keep[i - 1]) throw DimensionError("ptrace: keep indices must be strictly increasing");
    }
    if (keep.empty()) throw DimensionError("ptrace: nothing to keep");

    Mat rho = state.toDensity();
    std::vector<bool> kept(lay.size(), false);
    for (int k : keep) kept[k] = true;

    SpaceLayout out;
    int traced_total = 1;
    for (int i = 0; i < lay.size(); ++i) {
        if (kept[i]) {
            out.dims.push_back(lay.dims[i]);
            if (!lay.labels.empty()) out.labels.push_back(lay.labels[i]);
        } else {
            traced_total *= lay.dims[i];
        }
    }
    const int kept_total = out.total();

    // map full index -> (kept index, traced index)
    const int total = lay.total();
    std::vector<int> kidx(total), tidx(total);
    for (int full = 0; full < total; ++full) {
        int rem = full, k = 0, t = 0, kstride = 1, tstride = 1;
        for (int i = lay.size() - 1; i >= 0; --i) {
            int digit = rem % lay.dims[i];
            rem /= lay.dims[i];
            if (kept[i]) {
                k += digit * kstride;
                kstride *= lay.dims[i];
            } else {
                t += digit * tstride;
                tstride *= lay.dims[i];
            }
        }
        kidx[full] = k;
        tidx[full] = t;
    }
    std::vector<std::vector<int>> groups(traced_total, std::vector<int>(kept_total));
    for (int full = 0; full < total; ++full) groups[tidx[full]][kidx[full]] = full;

    Mat red = Mat::Zero(kept_total, kept_total);
    for (const auto& g : groups)
        for (int i = 0; i < kept_total; ++i)
            for (int j = 0; j < kept_total; ++j) red(i, j) += rho(g[i], g[j]);
    return QState{QState::Kind::Density, red, out};
}

namespace {

double realChecked(cplx v, double scale)
{
    if (std::abs(v.imag()) > 1e-9 * std::max(1.0, scale))
        throw Error("expectation value has a non-negligible imaginary part");
    return v.real();
}

} // namespace

double expectKet(const Mat& op, const Vec& psi)
{
    if (op.rows() != psi.size() || op.cols() != psi.size()) throw DimensionError("expect: dimension mismatch");
    return realChecked(psi.dot(op * psi), maxAbs(op));
}

double expectDensity(const Mat& op, const Mat& rho)
{
    if (op.rows() != rho.rows() || op.cols() != rho.cols()) throw DimensionError("expect: dimension mismatch");
    cplx acc = (op.transpose().cwiseProduct(rho)).sum();
    return realChecked(acc, maxAbs(op));
}

double expect(const Mat& op, const QState& state)
{
    if (state.isKet()) return expectKet(op, state.data.col(0));
    return expectDensity(op, state.data);
}

Mat sigmaMinus()
{
    Mat m = Mat::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}

Mat sigmaPlus()
{
    return sigmaMinus().adjoint();
}

Mat sigmaX()
{
    Mat m = Mat::Zero(2, 2);
    m(0, 1) = m(1, 0) = 1.0;
    return m;
}

Mat sigmaY()
{
    Mat m = Mat::Zero(2, 2);
    m(0, 1) = cplx(0.0, -1.0);
    m(1, 0) = cplx(0.0, 1.0);
    return m;
}

Mat sigmaZ()
{
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = -1.0;
    m(1, 1) = 1.0;
    return m;
}

Mat destroy(int levels)
{
    if (levels < 2) throw DimensionError("ladder operator needs at least 2 levels");
    Mat a = Mat::Zero(levels, levels);
    for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

} // namespace mqc
