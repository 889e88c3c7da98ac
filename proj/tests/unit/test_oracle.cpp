#include <cmath>
#include <memory>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "qbm2/coefficients.hpp"
#include "qbm2/elementary.hpp"
#include "qbm2/errors.hpp"
#include "qbm2/oracle.hpp"
#include "test_support.hpp"

using namespace qbm2;

namespace {

GaussianState regression_state()
{
    GaussianState s;
    s.ordering = Ordering::Lab;
    s.mean << 0.7, 0.2, -0.3, 0.5;
    s.cov << 0.5, 0.1, 0.0, 0.0,
             0.1, 0.6, 0.0, 0.0,
             0.0, 0.0, 0.3, 0.0,
             0.0, 0.0, 0.0, 1.2;
    return s;
}

SystemConfig oscillators(double omega)
{
    SystemConfig cfg;
    cfg.mass = 1.0;
    cfg.omega = omega;
    return cfg;
}

// Half the recurrence time, rounded down to whole output intervals.
FlowGrid half_recurrence_grid(const FiniteBath& bath, double dt, std::size_t stride)
{
    const double out = dt * static_cast<double>(stride);
    return {std::floor(0.5 * bath.recurrence_time() / out) * out, dt, stride};
}

Eigen::MatrixXd full_symplectic(Eigen::Index n)
{
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    J.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    return J;
}

Eigen::VectorXd symplectic_spectrum(const Eigen::MatrixXd& cov)
{
    const auto n = cov.rows() / 2;
    const Eigen::MatrixXd M = full_symplectic(n) * cov;
    Eigen::VectorXd mags = M.eigenvalues().cwiseAbs();
    std::sort(mags.data(), mags.data() + mags.size());
    return mags;
}

// Master-equation trajectory for a finite bath on the flow grid.
StateTrajectory master_run(const FiniteBath& bath, const SystemConfig& cfg, const GaussianState& s0,
                           double T, const FlowGrid& grid, CoefficientOptions opt = {})
{
    const auto kt = tabulate_kernels(bath.spectral_density(), T, grid.t_end, grid.dt);
    auto traj = std::make_shared<const CoefficientTrajectory>(
        coefficient_trajectory(kt, cfg.mass, cfg.omega, grid.t_end, opt));
    return evolve(s0, cfg, TrajectoryDrive{traj, cfg.omega}, grid, Ordering::Lab);
}

}  // namespace

TEST(Discretize, SingleModeAtMidpoint)
{
    const auto sd = SpectralDensity::ohmic(2.0, 0.1, 20.0);
    const auto bath = discretize_ohmic(sd, 1, 80.0);
    ASSERT_EQ(bath.modes().size(), 1u);
    EXPECT_DOUBLE_EQ(bath.modes()[0].frequency, 40.0);
    EXPECT_NEAR(mode_weight(bath.modes()[0]), spectral_density(sd, 40.0) * 80.0, 1e-12);
    EXPECT_EQ(bath.origin(), FiniteBath::Origin::OhmicSampled);
    EXPECT_EQ(bath.sampled_count(), 1u);
}

TEST(Discretize, TotalWeightMatchesIntegral)
{
    const auto sd = SpectralDensity::ohmic(2.0, 0.1, 20.0);
    const auto bath = discretize_ohmic(sd, 400, 80.0);
    double total = 0.0;
    for (const auto& m : bath.modes()) {
        total += mode_weight(m);
    }
    const double integral = 2.0 * 0.1 * 20.0 * 20.0 / 2.0;
    EXPECT_NEAR(total / integral, 1.0, 0.01);
    EXPECT_NEAR(bath.recurrence_time(), 2.0 * std::numbers::pi / 0.2, 1e-9);
}

TEST(Discretize, KernelsConverge)
{
    // omega_max = 160 puts the truncated tail below rounding, so what remains
    // is the sampling error.
    const auto sd = SpectralDensity::ohmic(2.0, 0.1, 20.0);
    const double floor = 1e-12 * noise_kernel(sd, 10.0, 0.0);
    double last = std::numeric_limits<double>::infinity();
    for (std::size_t n : {25u, 50u, 100u, 200u}) {
        const auto bath = discretize_ohmic(sd, n, 160.0);
        const auto discrete = bath.spectral_density();
        double err = 0.0;
        for (double s : {0.05, 0.1, 0.2}) {
            err = std::max(err, std::abs(noise_kernel(discrete, 10.0, s) - noise_kernel(sd, 10.0, s)));
            err = std::max(err, std::abs(dissipation_kernel(discrete, s) - dissipation_kernel(sd, s)));
        }
        EXPECT_LE(err, std::max(0.5 * last, floor)) << n;
        last = err;
    }
}

TEST(ExactEvolution, ZeroCouplingIsClosedRotation)
{
    const auto bath = FiniteBath::explicit_modes({{1.0, 2.0, 0.0}, {1.0, 3.0, 0.0}});
    const auto cfg = oscillators(1.5);
    const auto run = evolve_exact(bath, cfg, regression_state(), 1.0, {3.0, 0.5, 1});
    for (std::size_t k = 0; k < run.reduced.t.size(); ++k) {
        const double t = run.reduced.t[k];
        const double c = std::cos(1.5 * t);
        const double s = std::sin(1.5 * t);
        Eigen::Matrix4d R = Eigen::Matrix4d::Zero();
        R.block<2, 2>(0, 0) << c, s / 1.5, -1.5 * s, c;
        R.block<2, 2>(2, 2) = R.block<2, 2>(0, 0);
        const Eigen::Matrix4d expected = R * regression_state().cov * R.transpose();
        EXPECT_LT((run.reduced.states[k].cov - expected).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((run.reduced.states[k].mean - R * regression_state().mean).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ExactEvolution, ResonantSingleModeMatchesReference)
{
    const auto ref = fixtures::load_golden_json("single_mode.json")["resonant"];
    const auto& p = ref["params"];
    const auto bath = FiniteBath::explicit_modes({{p["mode_mass"], p["mode_frequency"], p["coupling"]}});
    auto cfg = oscillators(p["omega"]);
    cfg.mass = p["mass"];
    GaussianState s0;
    s0.ordering = Ordering::Lab;
    for (int i = 0; i < 4; ++i) {
        s0.mean[i] = ref["mean_lab"][i];
        for (int j = 0; j < 4; ++j) {
            s0.cov(i, j) = ref["cov_lab"][i][j];
        }
    }
    const auto run = evolve_exact(bath, cfg, s0, p["temperature"], {10.0, 1.0, 1});
    for (std::size_t k = 0; k < ref["trajectory"].size(); ++k) {
        const auto& row = ref["trajectory"][k];
        const auto& st = run.reduced.states[k + 1];
        ASSERT_DOUBLE_EQ(run.reduced.t[k + 1], row["t"].get<double>());
        for (int i = 0; i < 4; ++i) {
            EXPECT_NEAR(st.mean[i], row["mean_lab"][i].get<double>(), 1e-10);
            for (int j = 0; j < 4; ++j) {
                EXPECT_NEAR(st.cov(i, j), row["cov_lab"][i][j].get<double>(), 1e-10);
            }
        }
    }
}

TEST(ExactEvolution, PropagatorIsSymplectic)
{
    const auto bath = discretize_ohmic(SpectralDensity::ohmic(2.0, 0.1, 20.0), 50, 80.0);
    const ExactEvolution ev(bath, oscillators(2.0));
    const auto J = full_symplectic(static_cast<Eigen::Index>(ev.dimension()));
    for (double t : {0.3, 2.0, 7.5}) {
        const Eigen::MatrixXd S = ev.propagator(t);
        EXPECT_LT((S.transpose() * J * S - J).cwiseAbs().maxCoeff(), 1e-9) << t;
    }
}

TEST(ExactEvolution, SymplecticSpectrumConstant)
{
    const auto bath = discretize_ohmic(SpectralDensity::ohmic(2.0, 0.1, 20.0), 30, 80.0);
    const ExactEvolution ev(bath, oscillators(2.0));
    const auto s0 = regression_state();
    const Eigen::MatrixXd cov0 = ev.initial_covariance(s0, 3.0);
    const Eigen::VectorXd spec0 = symplectic_spectrum(cov0);
    for (double t : {0.5, 3.0}) {
        const Eigen::MatrixXd S = ev.propagator(t);
        const Eigen::VectorXd spec = symplectic_spectrum(S * cov0 * S.transpose());
        EXPECT_LT((spec - spec0).cwiseAbs().maxCoeff(), 1e-8 * spec0.maxCoeff()) << t;
    }
}

TEST(ExactEvolution, DependsOnModesOnlyThroughDensity)
{
    // m -> 3m, C -> sqrt(3) C keeps C^2 / (m w) and therefore I(w).
    const std::vector<BathMode> a{{1.0, 1.5, 0.3}, {1.0, 2.5, 0.2}, {1.0, 4.0, 0.4}};
    std::vector<BathMode> b = a;
    for (auto& m : b) {
        m.mass *= 3.0;
        m.coupling *= std::sqrt(3.0);
    }
    const auto cfg = oscillators(1.2);
    const FlowGrid grid{6.0, 0.5, 1};
    const auto ra = evolve_exact(FiniteBath::explicit_modes(a), cfg, regression_state(), 2.0, grid);
    const auto rb = evolve_exact(FiniteBath::explicit_modes(b), cfg, regression_state(), 2.0, grid);
    for (std::size_t k = 0; k < ra.reduced.t.size(); ++k) {
        EXPECT_LT((ra.reduced.states[k].cov - rb.reduced.states[k].cov).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(ExactEvolution, RelativeBlockIsUnitary)
{
    const auto bath = discretize_ohmic(SpectralDensity::ohmic(2.0, 0.1, 20.0), 100, 80.0);
    const auto run = evolve_exact(bath, oscillators(2.0), regression_state(), 10.0, {10.0, 0.05, 10});
    const double det0 = to_cm_rel(run.reduced.states.front()).cov.block<2, 2>(2, 2).determinant();
    for (const auto& s : run.reduced.states) {
        EXPECT_NEAR((to_cm_rel(s).cov.block<2, 2>(2, 2).determinant()), det0, 1e-8);
    }
}

TEST(ExactEvolution, RecurrenceWarning)
{
    const auto bath = discretize_ohmic(SpectralDensity::ohmic(2.0, 0.1, 20.0), 20, 80.0);
    const double t_rec = bath.recurrence_time();
    const auto near = evolve_exact(bath, oscillators(2.0), regression_state(), 1.0, {0.5 * t_rec, 0.01, 1});
    EXPECT_FALSE(near.recurrence_warning);
    const auto far = evolve_exact(bath, oscillators(2.0), regression_state(), 1.0, {0.9 * t_rec, 0.01, 1});
    EXPECT_TRUE(far.recurrence_warning);
}

TEST(ExactEvolution, ThermalisesAtHighTemperature)
{
    // With the counterterm, Omega is the physical frequency and the centre of
    // mass relaxes to k_B T per quadratic pair.
    const double T = 5.0;
    const auto sd = SpectralDensity::ohmic(2.0, 0.2, 10.0);
    const auto bath = discretize_ohmic(sd, 400, 40.0);
    const auto cfg = oscillators(1.0);
    const auto run = evolve_exact(bath, cfg, regression_state(), T, {40.0, 0.5, 80}, true);
    ASSERT_FALSE(run.recurrence_warning);
    const auto cm = to_cm_rel(run.reduced.states.back());
    const double M1 = cfg.cm_mass();
    const double energy = cm.cov(1, 1) / (2.0 * M1) + 0.5 * M1 * cm.cov(0, 0) +
                          0.5 * (cm.mean[1] * cm.mean[1] / M1 + M1 * cm.mean[0] * cm.mean[0]);
    EXPECT_NEAR(energy / T, 1.0, 0.1);
}

TEST(OracleAgreement, SingleModeBath)
{
    const auto bath = FiniteBath::explicit_modes({{1.0, 2.5, 0.3}});
    const auto cfg = oscillators(1.0);
    const FlowGrid grid{8.0, 0.005, 20};
    const auto master = master_run(bath, cfg, regression_state(), 1.0, grid);
    const auto exact = evolve_exact(bath, cfg, regression_state(), 1.0, grid);
    const auto rep = compare_master_vs_oracle(master, exact.reduced);
    EXPECT_LE(rep.max_error, 2e-2);
    EXPECT_EQ(rep.diagnosis, "none");
}

TEST(OracleAgreement, FiftyModeBath)
{
    const auto bath = discretize_ohmic(SpectralDensity::ohmic(2.0, 0.1, 20.0), 50, 80.0);
    const auto cfg = oscillators(2.0);
    const auto grid = half_recurrence_grid(bath, 0.005, 20);
    const auto master = master_run(bath, cfg, regression_state(), 10.0, grid);
    const auto exact = evolve_exact(bath, cfg, regression_state(), 10.0, grid);
    const auto rep = compare_master_vs_oracle(master, exact.reduced);
    EXPECT_LE(rep.max_error, 2e-2);
    for (const auto& s : master.states) {
        EXPECT_GE(robertson_schrodinger_min(s), -1e-6);
    }
}

TEST(Compare, IdenticalInputs)
{
    const auto bath = FiniteBath::explicit_modes({{1.0, 2.5, 0.3}});
    const auto run = evolve_exact(bath, oscillators(1.0), regression_state(), 1.0, {2.0, 0.1, 1});
    const auto rep = compare_master_vs_oracle(run.reduced, run.reduced);
    EXPECT_EQ(rep.max_error, 0.0);
    EXPECT_EQ(rep.max_mean_error, 0.0);
    EXPECT_EQ(rep.diagnosis, "none");
}

TEST(Compare, FlippedDeltaIsDiagnosed)
{
    const auto bath = discretize_ohmic(SpectralDensity::ohmic(2.0, 0.1, 20.0), 50, 80.0);
    const auto cfg = oscillators(2.0);
    const auto grid = half_recurrence_grid(bath, 0.005, 20);
    CoefficientOptions flipped;
    flipped.delta_sign = -1;
    const auto master = master_run(bath, cfg, regression_state(), 10.0, grid, flipped);
    const auto exact = evolve_exact(bath, cfg, regression_state(), 10.0, grid);
    const auto rep = compare_master_vs_oracle(master, exact.reduced);
    EXPECT_GT(rep.max_error, 2e-2);
    EXPECT_EQ(rep.diagnosis, "Delta-sign");
}

TEST(Compare, GridMismatch)
{
    const auto bath = FiniteBath::explicit_modes({{1.0, 2.5, 0.3}});
    const auto a = evolve_exact(bath, oscillators(1.0), regression_state(), 1.0, {2.0, 0.1, 1});
    const auto b = evolve_exact(bath, oscillators(1.0), regression_state(), 1.0, {2.0, 0.1, 2});
    EXPECT_THROW(compare_master_vs_oracle(a.reduced, b.reduced), ConfigError);
}

TEST(Counterterm, MasterAndOracleAgree)
{
    const auto bath = discretize_ohmic(SpectralDensity::ohmic(2.0, 0.1, 20.0), 100, 80.0);
    auto cfg = oscillators(1.0);
    const auto grid = half_recurrence_grid(bath, 0.005, 20);
    const auto kt = tabulate_kernels(bath.spectral_density(), 10.0, grid.t_end, grid.dt);
    const double w = counterterm_frequency(bath.spectral_density(), cfg.mass, cfg.omega);
    auto traj = std::make_shared<const CoefficientTrajectory>(
        coefficient_trajectory(kt, cfg.mass, w, grid.t_end));
    const auto master = evolve(regression_state(), cfg, TrajectoryDrive{traj, w}, grid, Ordering::Lab);
    const auto exact = evolve_exact(bath, cfg, regression_state(), 10.0, grid, true);
    EXPECT_LE(compare_master_vs_oracle(master, exact.reduced).max_error, 2e-2);
}
