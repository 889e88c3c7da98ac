#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "qbm2/kernels.hpp"

namespace qbm2 {

// Strength of the memory term in the centre-of-mass equation
//     f'' + Omega^2 f + memory_coupling(M) int_0^s eta(s - l) f(l) dl = 0
// for oscillators of mass M each (centre-of-mass mass 2M).
double memory_coupling(double mass);

// Late-time limit of the memory term for slow motion, as a shift of Omega^2:
//     -memory_coupling(M) int_0^inf I(w) / w dw.
double static_frequency_shift(const SpectralDensity& sd, double mass);

// Centre-of-mass frequency with the bath counterterm
// sum_n C_n^2 / (2 m_n w_n^2) (x1 + x2)^2 added to the Hamiltonian:
// sqrt(Omega^2 - static_frequency_shift). The shift and the counterterm cancel
// at late times, so Omega stays the observed frequency.
double counterterm_frequency(const SpectralDensity& sd, double mass, double omega);

// Samples of one solution of the homogeneous equation on s_i = i dt.
struct IvpSolution {
    double dt = 0.0;
    std::vector<double> f;
    std::vector<double> df;
    std::vector<double> ddf;
    // int_0^{s_i} eta(s_i - l) f(l) dl
    std::vector<double> memory;

    std::size_t size() const noexcept { return f.size(); }
};

// Fixed-step fourth-order integration from (f0, df0). The history part of the
// memory integral uses the trapezoid rule with its endpoint derivative
// correction; the partial step uses Simpson. Cost O(N^2). Throws RangeError
// when the horizon is beyond the kernel table.
IvpSolution solve_homogeneous_ivp(const KernelTable& kt, double mass, double omega, double f0,
                                  double df0, double horizon);

struct ElementaryFunctions {
    double horizon = 0.0;
    double dt = 0.0;
    double mass = 0.0;
    double omega = 0.0;
    // Frequency used for w1, w2 (omega unless overridden).
    double omega_free = 0.0;

    std::vector<double> u1, u2, du1, du2;
    std::vector<double> w1, w2, dw1, dw2;
    std::vector<double> g0, dg0;

    std::size_t size() const noexcept { return u1.size(); }
};

// u1, u2 from two initial-value solves; w1, w2 in closed form with
// `omega_free` (defaults to omega). Throws DegenerateHorizonError at a focal
// horizon and ConfigError when t is not a positive grid multiple.
ElementaryFunctions build_elementary(const KernelTable& kt, double mass, double omega, double t,
                                     std::optional<double> omega_free = std::nullopt);

// Effective relative-coordinate frequency sqrt(Omega^2 + 2 kappa / M2), M2 = M/2.
double relative_frequency(double mass, double omega, double kappa);

// G1(s, tau) = g0(s - tau) for s > tau, else 0; linear interpolation.
double green_retarded(const ElementaryFunctions& ef, double s, double tau);

// Header `s,u1,u2,du1,du2,w1,w2,g0`.
void write_csv(std::ostream& out, const ElementaryFunctions& ef);

}  // namespace qbm2
