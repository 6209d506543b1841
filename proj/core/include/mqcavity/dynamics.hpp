#pragma once

#include <string>
#include <vector>

#include "mqcavity/ode.hpp"
#include "mqcavity/pulses.hpp"

namespace mqc {

struct EvolveOptions {
    double t0 = 0.0;
    double t1 = 100.0;
    double sample_dt = 0.2;
    // tight enough that closed runs keep N to ~1e-9 over a few hundred ns
    double rtol = 1e-12;
    double atol = 1e-14;
    double max_step = 0.5;
    bool store_states = false;
    bool check_positivity = true;

    void validate() const;
    StepControl control() const { return {rtol, atol, max_step, 0.0}; }
    bool operator==(const EvolveOptions&) const = default;
};

// Uniform grid t0, t0+dt, ... with t1 appended if the grid misses it.
std::vector<double> sampleGrid(double t0, double t1, double dt);

struct Observable {
    std::string name;
    Mat op;
};

struct TimeSeries {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    std::vector<Mat> states;  // only with store_states
    Mat final_state;
    OdeStats stats;
    double max_hermiticity_error = 0.0;  // density runs, before symmetrization
    std::vector<std::string> warnings;

    const std::vector<double>& series(const std::string& name) const;
};

// Pure-state propagation. Records each observable plus "norm".
TimeSeries evolveSchrodinger(const TDHamiltonian& h, const Vec& psi0, const EvolveOptions& opts,
                             const std::vector<Observable>& observables);
TimeSeries evolveSchrodinger(const TDHamiltonian& h, const QState& psi0, const EvolveOptions& opts,
                             const std::vector<Observable>& observables);

// Lindblad master equation. Records each observable plus "trace" and
// "purity".
TimeSeries evolveLindblad(const TDHamiltonian& h, const Mat& rho0, const std::vector<Mat>& c_ops,
                          const EvolveOptions& opts, const std::vector<Observable>& observables);
TimeSeries evolveLindblad(const TDHamiltonian& h, const QState& rho0, const std::vector<Mat>& c_ops,
                          const EvolveOptions& opts, const std::vector<Observable>& observables);

// Time-ordered propagator U(t1, t0) of a closed system.
Mat propagator(const TDHamiltonian& h, double t0, double t1, const EvolveOptions& opts);

inline constexpr int kOracleDimensionCap = 16;

// Dense Liouvillian exponential; test oracle for small systems.
QState liouvillianOracle(const Mat& h_static, const std::vector<Mat>& c_ops, double t, const QState& rho0);
Mat liouvillianOracle(const Mat& h_static, const std::vector<Mat>& c_ops, double t, const Mat& rho0);

enum class Axis { X, Y };

// exp(-i angle/2 sigma_axis) on the given qubit (1 or 2).
QState applyInstantPulse(const QState& state, Axis axis, double angle, int qubit);
// Rotation about cos(phi) x + sin(phi) y.
QState applyInstantPulse(const QState& state, double phi, double angle, int qubit);
Mat pulseUnitary(const SpaceLayout& layout, double phi, double angle, int qubit);

} // namespace mqc
