#pragma once

#include <vector>

#include "mqcavity/linalg.hpp"

namespace mqc {

struct Spectrum {
    std::vector<double> freqs;       // GHz, ascending from 0
    std::vector<double> magnitudes;  // |DFT| / N
};

inline constexpr int kZeroPadFactor = 4;

// Mean removed, rectangular window, zero padded to 4x, one-sided.
Spectrum fftSpectrum(const std::vector<double>& values, double dt);
// Quadratically refined maximum over bins with freq >= fmin.
double peakFrequency(const Spectrum& spec, double fmin);

// Wootters concurrence of a two-qubit density matrix.
double concurrence(const Mat& rho2q);
double stateFidelity(const QState& rho, const QState& target);
double stateFidelity(const Mat& rho, const Vec& target);

struct LZParams {
    std::vector<double> couplings;  // J_i in GHz
    double velocity = 1.0;          // |v| in GHz/ns
};

// exp(-2 pi sum(Jw_i^2) / vw) with Jw = 2 pi J and vw = 2 pi v.
double lzSurvival(const LZParams& p);

} // namespace mqc
