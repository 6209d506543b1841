#pragma once

#include <functional>
#include <vector>

#include "mqcavity/linalg.hpp"

namespace mqc {

struct SystemParams {
    int n_cavities = 3;
    int fock_levels = 2;
    double nu_f = 5.0;        // GHz
    double g_f = 0.135;       // GHz
    double g_q1f = 0.0135;    // GHz
    double g_q2f = 0.0135;    // GHz
    double nu_q1_idle = 4.3;  // GHz
    double nu_q2_idle = 4.1;  // GHz
    double kappa = 0.001;     // 1/ns
    double gamma = 0.005;     // 1/ns
    double gamma_phi = 0.005; // 1/ns

    // Config loading uses the strict form. The builders accept zero
    // couplings so decoupled limits can be studied.
    void validate(bool allow_zero_couplings = false) const;
    bool operator==(const SystemParams&) const = default;
};

inline constexpr int kDefaultDimensionCap = 4096;

struct OperatorSet {
    SpaceLayout layout;
    std::vector<Mat> a, adag;  // per mode, embedded
    Mat sz[2], sp[2], sm[2], nq[2];
    Mat N;

    int dim() const { return layout.total(); }
    int modes() const { return static_cast<int>(a.size()); }
    int qubitSlot(int qubit) const { return qubit == 1 ? 0 : layout.size() - 1; }
};

SpaceLayout makeLayout(const SystemParams& p);
OperatorSet buildOperators(const SystemParams& p, int dimension_cap = kDefaultDimensionCap);
Mat buildStaticH(const SystemParams& p, const OperatorSet& ops);
std::vector<Mat> buildCollapseOps(const SystemParams& p, const OperatorSet& ops);

// One time-dependent contribution coeff(t) * op.
struct TDTerm {
    Mat op;
    std::function<cplx(double)> coeff;
};

// omega_p in angular units (rad/ns), nu_probe in GHz.
std::vector<TDTerm> buildProbeTerms(double omega_p, double nu_probe, const OperatorSet& ops);

// Bare filter chain restricted to one photon, in GHz (n x n).
Eigen::MatrixXd filterBlock(const SystemParams& p);
// One-excitation block of the full Hamiltonian for fixed qubit
// frequencies, in GHz, ordered [q1, f1..fn, q2].
Eigen::MatrixXd singleExcitationBlock(const SystemParams& p, double nu_q1, double nu_q2);

// Isometry onto the product-basis states with at most max_excitations
// quanta. Columns are unit vectors in ascending basis order.
Mat excitationIsometry(const SpaceLayout& layout, int max_excitations);
// Product-basis index for given occupations (one entry per subsystem).
int basisIndex(const SpaceLayout& layout, const std::vector<int>& occupation);

} // namespace mqc
