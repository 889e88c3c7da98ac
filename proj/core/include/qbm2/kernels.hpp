#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "qbm2/constants.hpp"
#include "qbm2/spectral.hpp"

namespace qbm2 {

// eta(s) = -int_0^inf I(w) sin(w s) dw.
double dissipation_kernel(const SpectralDensity& sd, double s);

// nu(s) = int_0^inf I(w) coth(hbar w / 2 k_B T) cos(w s) dw; T = 0 takes coth = 1.
// Ohmic densities use adaptive Gauss-Kronrod with relative tolerance
// `rel_tol` against the L1 norm of the integrand.
double noise_kernel(const SpectralDensity& sd, double temperature, double s,
                    const PhysicalConstants& pc = {}, double rel_tol = 1e-9);

// eta and nu sampled at s_i = i dt, i = 0..N-1. Immutable once built.
class KernelTable {
public:
    KernelTable(double dt, std::vector<double> eta, std::vector<double> nu, double temperature,
                PhysicalConstants pc);

    double dt() const noexcept { return dt_; }
    std::size_t size() const noexcept { return eta_.size(); }
    double t_max() const noexcept { return dt_ * static_cast<double>(size() - 1); }
    double temperature() const noexcept { return temperature_; }
    const PhysicalConstants& constants() const noexcept { return pc_; }

    const std::vector<double>& eta() const noexcept { return eta_; }
    const std::vector<double>& nu() const noexcept { return nu_; }

    // Grid values at signed index i, reflected with eta odd and nu even.
    double eta_at(std::ptrdiff_t i) const;
    double nu_at(std::ptrdiff_t i) const;

    // Cubic Lagrange interpolation of eta at an arbitrary s in [-t_max, t_max].
    double eta_interp(double s) const;
    // Derivative of the same interpolant.
    double eta_deriv(double s) const;
    // Derivative of the cubic interpolant of nu (odd, zero at s = 0).
    double nu_deriv(double s) const;

private:
    double dt_;
    std::vector<double> eta_;
    std::vector<double> nu_;
    double temperature_;
    PhysicalConstants pc_;
};

inline constexpr std::size_t kDefaultMaxGridPoints = std::size_t{1} << 20;

// Throws ConfigError for dt <= 0, t_max < dt or T < 0, and ResourceError when
// the grid would exceed `max_points`.
KernelTable tabulate_kernels(const SpectralDensity& sd, double temperature, double t_max, double dt,
                             const PhysicalConstants& pc = {},
                             std::size_t max_points = kDefaultMaxGridPoints);

// Header `s,eta,nu`.
void write_csv(std::ostream& out, const KernelTable& kt);

}  // namespace qbm2
