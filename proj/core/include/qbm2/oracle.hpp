#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbm2/dynamics.hpp"
#include "qbm2/spectral.hpp"

namespace qbm2 {

class FiniteBath {
public:
    enum class Origin { Explicit, OhmicSampled };

    static FiniteBath explicit_modes(std::vector<BathMode> modes);

    const std::vector<BathMode>& modes() const noexcept { return modes_; }
    Origin origin() const noexcept { return origin_; }
    // 2 pi / (smallest spacing between distinct frequencies); infinite for one mode.
    double recurrence_time() const noexcept { return t_rec_; }
    // For sampled baths: N_B, omega_max and the sampling rule.
    std::size_t sampled_count() const noexcept { return sampled_count_; }
    double omega_max() const noexcept { return omega_max_; }
    const std::string& rule() const noexcept { return rule_; }

    SpectralDensity spectral_density() const { return SpectralDensity::discrete(modes_); }

private:
    friend FiniteBath discretize_ohmic(const SpectralDensity&, std::size_t, double);

    std::vector<BathMode> modes_;
    Origin origin_ = Origin::Explicit;
    double t_rec_ = std::numeric_limits<double>::infinity();
    std::size_t sampled_count_ = 0;
    double omega_max_ = 0.0;
    std::string rule_ = "explicit";
};

// Midpoint frequencies w_n = (n - 1/2) dw, dw = omega_max / N_B, unit masses
// and C_n^2 = m_n w_n I(w_n) dw / pi, so each mode carries I(w_n) dw.
FiniteBath discretize_ohmic(const SpectralDensity& sd, std::size_t n_modes, double omega_max);

// Exact Gaussian evolution of system plus bath. Coordinates q = (x1, x2, q_n),
// momenta in the same order; the full phase-space ordering is (q..., p...).
class ExactEvolution {
public:
    // `counterterm` adds sum_n C_n^2 / (2 m_n w_n^2) (x1 + x2)^2 to the potential.
    ExactEvolution(FiniteBath bath, const SystemConfig& cfg, bool counterterm = false);

    std::size_t dimension() const noexcept { return masses_.size(); }
    const FiniteBath& bath() const noexcept { return bath_; }

    // Full phase-space propagator S(t) in (q..., p...) ordering.
    Eigen::MatrixXd propagator(double t) const;

    // Product of the system state (Lab or CmRel) with the thermal bath.
    Eigen::VectorXd initial_mean(const GaussianState& system) const;
    Eigen::MatrixXd initial_covariance(const GaussianState& system, double temperature) const;

    // Reduced system state at each time (Lab ordering) for the given initial
    // full-space moments.
    StateTrajectory reduced(const Eigen::VectorXd& mean0, const Eigen::MatrixXd& cov0,
                            const std::vector<double>& times, double hbar) const;

private:
    Eigen::MatrixXd mode_evolution_rows(double t) const;

    FiniteBath bath_;
    SystemConfig cfg_;
    Eigen::VectorXd masses_;
    Eigen::MatrixXd modes_;     // orthogonal eigenvectors of M^-1/2 V M^-1/2
    Eigen::VectorXd lambda_;    // eigenvalues (squared normal frequencies)
};

struct OracleRun {
    StateTrajectory reduced;  // Lab ordering
    double recurrence_time = 0.0;
    // Set when the last output time exceeds 0.8 recurrence_time.
    bool recurrence_warning = false;
};

// Exact reduced trajectory on the flow grid's output times.
OracleRun evolve_exact(const FiniteBath& bath, const SystemConfig& cfg, const GaussianState& initial,
                       double temperature, const FlowGrid& grid, bool counterterm = false);

struct ComparisonReport {
    std::vector<double> t;
    // Per time: max over covariance entries of |d sigma_ij| / sqrt(sigma_ii sigma_jj)
    // in CmRel ordering, with the oracle diagonal as scale.
    std::vector<double> cov_error;
    // Per time: max over components of |d mean_i| / sqrt(sigma_ii).
    std::vector<double> mean_error;
    double max_error = 0.0;
    double max_mean_error = 0.0;
    // "none", "Delta-sign", "Gamma-prefactor" or "unclassified".
    std::string diagnosis = "none";
    // Least-squares ratio of master to oracle log-decay of the centre-of-mass mean.
    double damping_ratio = 1.0;
};

// Throws ConfigError when the two time grids differ.
ComparisonReport compare_master_vs_oracle(const StateTrajectory& master,
                                          const StateTrajectory& oracle, double threshold = 2e-2);

}  // namespace qbm2
