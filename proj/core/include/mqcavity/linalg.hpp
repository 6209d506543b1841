#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqcavity/errors.hpp"

namespace mqc {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Tensor layout of the composite space. Subsystem 0 is the leftmost
// (most significant) Kronecker factor.
struct SpaceLayout {
    std::vector<int> dims;
    std::vector<std::string> labels;

    int total() const;
    int size() const { return static_cast<int>(dims.size()); }
    void validate() const;
    bool operator==(const SpaceLayout&) const = default;
};

struct QState {
    enum class Kind { Ket, Density };

    Kind kind = Kind::Ket;
    Mat data;
    SpaceLayout layout;

    static QState ket(const Vec& psi, const SpaceLayout& layout);
    static QState density(const Mat& rho, const SpaceLayout& layout);

    bool isKet() const { return kind == Kind::Ket; }
    Mat toDensity() const;
};

double maxAbs(const Mat& a);
// max|A - A^dagger|
double hermiticityError(const Mat& a);
bool isHermitian(const Mat& a, double rel_tol = 1e-12);

Mat identity(int n);
Mat kron(const Mat& a, const Mat& b);
Mat embed(const Mat& op, int slot, const SpaceLayout& layout);

struct HermEig {
    RVec values;  // ascending
    Mat vectors;  // columns
};
HermEig hermEig(const Mat& h);

// General matrix exponential, Pade(13) with scaling and squaring.
Mat expm(const Mat& a);
// exp(-i h t) through the eigendecomposition of a Hermitian h.
Mat expmHermitian(const Mat& h, double t);
Mat expmHermitian(const HermEig& eig, double t);

QState ptrace(const QState& state, const std::vector<int>& keep);
double expect(const Mat& op, const QState& state);
double expectKet(const Mat& op, const Vec& psi);
double expectDensity(const Mat& op, const Mat& rho);

// Single-qubit and ladder building blocks, index 0 = |g>, 1 = |e>.
Mat sigmaMinus();
Mat sigmaPlus();
Mat sigmaX();
Mat sigmaY();
Mat sigmaZ();
Mat destroy(int levels);

} // namespace mqc
