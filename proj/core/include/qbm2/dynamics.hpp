#pragma once

#include <iosfwd>
#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qbm2/coefficients.hpp"
#include "qbm2/constants.hpp"
#include "qbm2/gaussian_state.hpp"

namespace qbm2 {

struct SystemConfig {
    double mass = 1.0;   // per oscillator
    double omega = 1.0;
    double kappa = 0.0;  // strength of kappa (x1 - x2)^k
    int k = 2;
    PhysicalConstants constants{};

    double cm_mass() const noexcept { return 2.0 * mass; }
    double rel_mass() const noexcept { return 0.5 * mass; }
};

// Throws ConfigError for M <= 0 or Omega < 0.
void validate(const SystemConfig& cfg);

// Throws UnsupportedError unless the relative Hamiltonian is quadratic.
void require_quadratic(const SystemConfig& cfg);

// Centre-of-mass driving: either a computed trajectory (interpolated with
// cubic Lagrange polynomials) or constant Fokker-Planck-limit coefficients
// with a renormalised frequency.
struct MarkovDrive {
    MarkovConstants constants;
    double omega_renormalized = 0.0;
};

struct TrajectoryDrive {
    std::shared_ptr<const CoefficientTrajectory> trajectory;
    double omega = 0.0;
};

using CmDrive = std::variant<TrajectoryDrive, MarkovDrive>;

// Drift and diffusion entries at time t: Omega_eff^2 = Omega^2 + dOmega2.
struct CmRates {
    double omega2 = 0.0;
    double Gamma = 0.0;
    double Delta = 0.0;
    double Sigma = 0.0;
};

// Throws SingularCoefficientError when t sits next to a trajectory gap and
// RangeError past its end.
CmRates cm_rates(const CmDrive& drive, double t);

struct FlowGrid {
    double t_end = 0.0;
    double dt = 0.0;
    std::size_t output_stride = 1;
};

// Propagator Phi(t) and noise covariance N(t) of the centre-of-mass flow,
// sampled at output times: state(t) = Phi mean0, Phi cov0 Phi^T + N.
struct CmFlow {
    std::vector<double> t;
    std::vector<Eigen::Matrix2d> Phi;
    std::vector<Eigen::Matrix2d> N;
};

// RK4 on d Phi/dt = A Phi and dN/dt = A N + N A^T + D.
CmFlow cm_moment_flow(const CmDrive& drive, double cm_mass, const FlowGrid& grid);

// Closed-form relative propagator at time t (unitary rotation with
// Omega_rel = sqrt(Omega^2 + 2 kappa / M2), or free motion when it is 0).
Eigen::Matrix2d rel_propagator(const SystemConfig& cfg, double t);

struct StateTrajectory {
    std::vector<double> t;
    std::vector<GaussianState> states;
};

// Both blocks and the cross covariances. Output ordering follows `out`.
StateTrajectory evolve(const GaussianState& initial, const SystemConfig& cfg, const CmDrive& drive,
                       const FlowGrid& grid, Ordering out = Ordering::CmRel);

// Fokker-Planck limit free particle without drag, diffusion D_PP = 2 D:
// (sigma_XX, sigma_PP) from sigma_XX(0) = a2, sigma_PP(0) = b2, sigma_XP(0) = 0.
struct CmVariances {
    double xx = 0.0;
    double pp = 0.0;
};
CmVariances markov_free_particle_cm(double a2, double b2, double diffusion, double cm_mass, double t);

// Free relative motion: (c^2 + d^2 t^2 / M2^2, d^2).
CmVariances free_particle_rel(double c2, double d2, double rel_mass, double t);

// Header `t,mean1..mean4,cov11,cov12,...,cov44` (upper triangle).
void write_csv(std::ostream& out, const StateTrajectory& traj);

}  // namespace qbm2
