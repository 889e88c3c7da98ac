#pragma once

#include <numbers>

namespace qbm2 {

struct PhysicalConstants {
    double hbar = 1.0;
    double k_B = 1.0;
};

// Bath normalisation used throughout the library.
//
// A mode (m, w, C) coupled through (x1 + x2) C q contributes 2*pi*C^2/(2 m w)
// to the spectral density I(w). With this weight the ohmic parameter gamma is
// exactly the centre-of-mass momentum damping rate, and the centre-of-mass
// oscillator (mass 2M, coupling 2C) sees the kernels
//     eta_cm = kCmKernelWeight * eta,   nu_cm = kCmKernelWeight * nu,
// where eta and nu are the integrals of I itself.
inline constexpr double kModeWeight = 2.0 * std::numbers::pi;
inline constexpr double kCmKernelWeight = 2.0 / std::numbers::pi;

}  // namespace qbm2
