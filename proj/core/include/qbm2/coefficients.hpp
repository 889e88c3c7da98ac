#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "qbm2/elementary.hpp"
#include "qbm2/kernels.hpp"

namespace qbm2 {

// Values of the four time-dependent coefficients at one time. They enter the
// centre-of-mass moment flow as
//     A = [[0, 1/M1], [-M1 (Omega^2 + dOmega2), -2 Gamma]],
//     D = [[0, Delta], [Delta, 2 Sigma]].
struct Coefficients {
    double dOmega2 = 0.0;
    double Gamma = 0.0;
    double Delta = 0.0;
    double Sigma = 0.0;
};

struct CoefficientOptions {
    // Sign applied to Delta where it enters D. +1 is the default convention;
    // -1 exists for fault-injection runs against the oracle.
    int delta_sign = +1;
    // Keep every stride-th grid time.
    std::size_t stride = 1;
};

struct CoefficientTrajectory {
    std::vector<double> t;
    std::vector<double> dOmega2, Gamma, Delta, Sigma;
    // False where the drift is singular (the coefficients diverge); values there are NaN.
    std::vector<bool> valid;
    double grid_dt = 0.0;
    std::size_t stride = 1;
    std::string convention_tag;

    std::size_t size() const noexcept { return t.size(); }
    Coefficients at(std::size_t i) const { return {dOmega2[i], Gamma[i], Delta[i], Sigma[i]}; }
};

// Exact centre-of-mass response on the grid: the homogeneous solutions
// f_a (f = 1, f' = 0) and f_b (f = 0, f' = 1), and the covariance N(t) built
// up by the bath noise from a zero initial state. The full centre-of-mass
// covariance is Phi sigma0 Phi^T + N with Phi = [[f_a, f_b/M1], [M1 f_a', f_b']].
struct CmResponse {
    double dt = 0.0;
    double cm_mass = 0.0;
    IvpSolution fa, fb;
    std::vector<double> Nxx, Nxp, Npp;
    std::vector<double> dNxx, dNxp, dNpp;

    std::size_t size() const noexcept { return fa.size(); }
};

CmResponse cm_response(const KernelTable& kt, double mass, double omega, double t_max);

// Coefficients at one horizon. dOmega2 and Gamma come from the boundary-value
// functions u1, u2 at that horizon; Delta and Sigma from the noise covariance
// accumulated up to it. Throws DegenerateHorizonError at a focal horizon and
// SingularCoefficientError where du1(t) = 0.
Coefficients coefficients_at_horizon(const KernelTable& kt, double mass, double omega, double t,
                                     const CoefficientOptions& opt = {});

// Whole trajectory on the kernel grid from one pair of initial-value solves,
// O(N^2) in total. Singular times become gaps rather than errors.
CoefficientTrajectory coefficient_trajectory(const KernelTable& kt, double mass, double omega,
                                             double t_max, const CoefficientOptions& opt = {});

// Fokker-Planck limit (Gamma, Delta, Sigma) = (gamma, 0, 2 M1 gamma k_B T).
// The frequency shift diverges there; callers supply a renormalised frequency.
struct MarkovConstants {
    double Gamma = 0.0;
    double Delta = 0.0;
    double Sigma = 0.0;
};

MarkovConstants markov_limit_constants(double cm_mass, double damping, double temperature,
                                    const PhysicalConstants& pc = {});

// Header `t,dOmega2,Gamma,Delta,Sigma`; gaps are written as nan.
void write_csv(std::ostream& out, const CoefficientTrajectory& traj);

}  // namespace qbm2
