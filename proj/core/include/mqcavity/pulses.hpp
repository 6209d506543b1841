#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mqcavity/model.hpp"

namespace mqc {

enum class Shape { Linear, RaisedCosine };

Shape parseShape(const std::string& s);
std::string shapeName(Shape s);

// Ramp-hold-ramp excursion from the trajectory base to target.
struct Segment {
    double t_start = 0.0;
    double ramp_up = 0.0;
    double hold = 0.0;
    double ramp_down = 0.0;
    double target = 0.0;
    Shape shape = Shape::Linear;

    double end() const { return t_start + ramp_up + hold + ramp_down; }
    bool operator==(const Segment&) const = default;
};

struct Trajectory {
    double base = 0.0;
    std::vector<Segment> segments;

    void validate() const;
    bool operator==(const Trajectory&) const = default;
};

double evalTrajectory(const Trajectory& traj, double t);
// Every instant where the trajectory or its slope may jump.
std::vector<double> trajectoryBreakpoints(const Trajectory& traj);

struct Schedule {
    Trajectory q1;
    Trajectory q2;
};

struct ProbeSpec {
    double omega_p = 0.0;   // rad/ns
    double nu_probe = 0.0;  // GHz
};

struct TDHamiltonian {
    Mat static_part;
    std::vector<TDTerm> terms;
    std::vector<double> breakpoints;  // sorted, unique
    // Diagonal generator (rad/ns) of a rotating frame the solvers
    // integrate in. Empty means the lab frame. Each operator must shift
    // it by a fixed amount. With a frame set, evolved kets and
    // propagators are exact up to a global phase.
    RVec frame;

    int dim() const { return static_cast<int>(static_part.rows()); }
    Mat at(double t) const;
    // P^dagger H P for an isometry P whose range every operator leaves
    // invariant. Throws if that invariance does not hold.
    TDHamiltonian restricted(const Mat& iso) const;
};

// P^dagger op P, with the same invariance check as restricted().
Mat restrictOperator(const Mat& op, const Mat& iso);

TDHamiltonian assembleTD(const SystemParams& p, const OperatorSet& ops, const Schedule& schedule,
                         const std::optional<ProbeSpec>& probe = std::nullopt);

// k-th bare filter eigenfrequency, ascending, 1-based.
double resonanceTarget(const SystemParams& p, int k);
// Top of the bare filter band.
double filterBandTop(const SystemParams& p);

} // namespace mqc
