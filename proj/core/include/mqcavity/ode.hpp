#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "mqcavity/linalg.hpp"

namespace mqc {

struct StepControl {
    double rtol = 1e-12;
    double atol = 1e-14;
    double max_step = 0.5;
    double first_step = 0.0;  // 0 picks a heuristic initial step
};

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_calls = 0;
};

using OdeRhs = std::function<void(double t, const Mat& y, Mat& dy)>;
using OdeSampler = std::function<void(std::size_t index, double t, const Mat& y)>;

// Dormand-Prince 5(4) with PI step control and 4th-order dense output.
// breakpoints inside (t0, t1) are hit exactly; no step straddles one.
// sample_times must be ascending within [t0, t1]; the sampler sees the
// interpolated state at each. Returns the state at t1.
Mat odeIntegrate(const OdeRhs& rhs, const Mat& y0, double t0, double t1, const std::vector<double>& breakpoints,
                 const std::vector<double>& sample_times, const OdeSampler& sampler, const StepControl& ctl,
                 OdeStats* stats = nullptr);

} // namespace mqc
