#include "qbm2/oracle.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qbm2/errors.hpp"

namespace qbm2 {
namespace {

double recurrence_of(const std::vector<BathMode>& modes)
{
    std::vector<double> w;
    w.reserve(modes.size());
    for (const auto& m : modes) {
        w.push_back(m.frequency);
    }
    std::sort(w.begin(), w.end());
    double spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < w.size(); ++i) {
        const double d = w[i] - w[i - 1];
        if (d > 1e-12 * w[i]) {
            spacing = std::min(spacing, d);
        }
    }
    return 2.0 * std::numbers::pi / spacing;
}

}  // namespace

FiniteBath FiniteBath::explicit_modes(std::vector<BathMode> modes)
{
    // Validation is shared with the discrete spectral density.
    (void)SpectralDensity::discrete(modes);
    FiniteBath b;
    b.t_rec_ = recurrence_of(modes);
    b.modes_ = std::move(modes);
    return b;
}

FiniteBath discretize_ohmic(const SpectralDensity& sd, std::size_t n_modes, double omega_max)
{
    if (n_modes == 0) {
        throw ConfigError("bath discretisation needs at least one mode");
    }
    if (!(omega_max > 0.0)) {
        throw ConfigError("bath discretisation needs omega_max > 0");
    }
    const double dw = omega_max / static_cast<double>(n_modes);
    FiniteBath b;
    b.origin_ = FiniteBath::Origin::OhmicSampled;
    b.sampled_count_ = n_modes;
    b.omega_max_ = omega_max;
    b.rule_ = "midpoint";
    b.modes_.reserve(n_modes);
    for (std::size_t n = 0; n < n_modes; ++n) {
        const double w = (static_cast<double>(n) + 0.5) * dw;
        const double mass = 1.0;
        const double c2 = mass * w * spectral_density(sd, w) * dw / std::numbers::pi;
        b.modes_.push_back({mass, w, std::sqrt(c2)});
    }
    b.t_rec_ = 2.0 * std::numbers::pi / dw;
    return b;
}

ExactEvolution::ExactEvolution(FiniteBath bath, const SystemConfig& cfg, bool counterterm)
    : bath_(std::move(bath))
    , cfg_(cfg)
{
    validate(cfg_);
    require_quadratic(cfg_);
    const auto& modes = bath_.modes();
    const auto n = static_cast<Eigen::Index>(modes.size() + 2);
    masses_.resize(n);
    masses_(0) = cfg_.mass;
    masses_(1) = cfg_.mass;
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
    const double k2 = cfg_.kappa != 0.0 ? 2.0 * cfg_.kappa : 0.0;
    v(0, 0) = cfg_.mass * cfg_.omega * cfg_.omega + k2;
    v(1, 1) = v(0, 0);
    v(0, 1) = -k2;
    v(1, 0) = -k2;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k + 2);
        masses_(i) = modes[k].mass;
        v(i, i) = modes[k].mass * modes[k].frequency * modes[k].frequency;
        v(0, i) = v(i, 0) = modes[k].coupling;
        v(1, i) = v(i, 1) = modes[k].coupling;
        if (counterterm) {
            const double ct = modes[k].coupling * modes[k].coupling / v(i, i);
            v(0, 0) += ct;
            v(1, 1) += ct;
            v(0, 1) += ct;
            v(1, 0) += ct;
        }
    }
    const Eigen::VectorXd inv_sqrt = masses_.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd vt = inv_sqrt.asDiagonal() * v * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(vt);
    if (es.info() != Eigen::Success) {
        throw NumericalError("normal-mode decomposition failed");
    }
    modes_ = es.eigenvectors();
    lambda_ = es.eigenvalues();
}

namespace {

struct ModeFactors {
    Eigen::VectorXd c;      // d xi / d xi0
    Eigen::VectorXd s;      // d xi / d pi0
    Eigen::VectorXd msin;   // d pi / d xi0
};

ModeFactors mode_factors(const Eigen::VectorXd& lambda, double t)
{
    const auto n = lambda.size();
    ModeFactors f{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
    const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < n; ++k) {
        const double l = lambda(k);
        if (std::abs(l) <= 1e-14 * scale) {
            f.c(k) = 1.0;
            f.s(k) = t;
        } else if (l > 0.0) {
            const double w = std::sqrt(l);
            f.c(k) = std::cos(w * t);
            f.s(k) = std::sin(w * t) / w;
        } else {
            const double w = std::sqrt(-l);
            f.c(k) = std::cosh(w * t);
            f.s(k) = std::sinh(w * t) / w;
        }
        f.msin(k) = -l * f.s(k);
    }
    return f;
}

}  // namespace

Eigen::MatrixXd ExactEvolution::propagator(double t) const
{
    const auto n = masses_.size();
    const auto f = mode_factors(lambda_, t);
    const Eigen::VectorXd sq = masses_.cwiseSqrt();
    const Eigen::VectorXd isq = sq.cwiseInverse();
    const Eigen::MatrixXd& o = modes_;
    Eigen::MatrixXd s(2 * n, 2 * n);
    s.topLeftCorner(n, n) = isq.asDiagonal() * o * f.c.asDiagonal() * o.transpose() * sq.asDiagonal();
    s.topRightCorner(n, n) =
        isq.asDiagonal() * o * f.s.asDiagonal() * o.transpose() * isq.asDiagonal();
    s.bottomLeftCorner(n, n) =
        sq.asDiagonal() * o * f.msin.asDiagonal() * o.transpose() * sq.asDiagonal();
    s.bottomRightCorner(n, n) =
        sq.asDiagonal() * o * f.c.asDiagonal() * o.transpose() * isq.asDiagonal();
    return s;
}

namespace {

// Full-space indices of the Lab ordering (x1, P1, x2, P2).
std::array<Eigen::Index, 4> lab_indices(Eigen::Index n)
{
    return {0, n, 1, n + 1};
}

}  // namespace

Eigen::VectorXd ExactEvolution::initial_mean(const GaussianState& system) const
{
    const auto lab = with_ordering(system, Ordering::Lab);
    const auto n = masses_.size();
    Eigen::VectorXd m = Eigen::VectorXd::Zero(2 * n);
    const auto idx = lab_indices(n);
    for (int i = 0; i < 4; ++i) {
        m(idx[static_cast<std::size_t>(i)]) = lab.mean(i);
    }
    return m;
}

Eigen::MatrixXd ExactEvolution::initial_covariance(const GaussianState& system,
                                                   double temperature) const
{
    if (!(temperature >= 0.0)) {
        throw ConfigError("temperature must be non-negative");
    }
    const auto lab = with_ordering(system, Ordering::Lab);
    const auto n = masses_.size();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    const auto idx = lab_indices(n);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            c(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]) = lab.cov(i, j);
        }
    }
    const double hbar = cfg_.constants.hbar;
    const auto& modes = bath_.modes();
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const auto& m = modes[k];
        const double coth =
            temperature == 0.0
                ? 1.0
                : 1.0 / std::tanh(hbar * m.frequency / (2.0 * cfg_.constants.k_B * temperature));
        const auto i = static_cast<Eigen::Index>(k + 2);
        c(i, i) = hbar / (2.0 * m.mass * m.frequency) * coth;
        c(n + i, n + i) = hbar * m.mass * m.frequency / 2.0 * coth;
    }
    return c;
}

StateTrajectory ExactEvolution::reduced(const Eigen::VectorXd& mean0, const Eigen::MatrixXd& cov0,
                                        const std::vector<double>& times, double hbar) const
{
    const auto n = masses_.size();
    if (mean0.size() != 2 * n || cov0.rows() != 2 * n || cov0.cols() != 2 * n) {
        throw ConfigError("initial moments do not match the system-plus-bath dimension");
    }
    const Eigen::VectorXd sq = masses_.cwiseSqrt();
    const Eigen::VectorXd isq = sq.cwiseInverse();
    // Moments in normal-mode coordinates: xi = O^T M^1/2 q, pi = O^T M^-1/2 p.
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    k.topLeftCorner(n, n) = modes_.transpose() * sq.asDiagonal();
    k.bottomRightCorner(n, n) = modes_.transpose() * isq.asDiagonal();
    const Eigen::VectorXd mean_modes = k * mean0;
    const Eigen::MatrixXd cov_modes = k * cov0 * k.transpose();

    StateTrajectory out;
    out.t = times;
    out.states.reserve(times.size());
    Eigen::MatrixXd r(4, 2 * n);
    for (double t : times) {
        const auto f = mode_factors(lambda_, t);
        for (int i = 0; i < 2; ++i) {
            const Eigen::RowVectorXd row = modes_.row(i);
            // Lab rows: x_i at 2i, P_i at 2i + 1.
            r.block(2 * i, 0, 1, n) = isq(i) * row.cwiseProduct(f.c.transpose());
            r.block(2 * i, n, 1, n) = isq(i) * row.cwiseProduct(f.s.transpose());
            r.block(2 * i + 1, 0, 1, n) = sq(i) * row.cwiseProduct(f.msin.transpose());
            r.block(2 * i + 1, n, 1, n) = sq(i) * row.cwiseProduct(f.c.transpose());
        }
        GaussianState g;
        g.ordering = Ordering::Lab;
        g.hbar = hbar;
        g.mean = r * mean_modes;
        const Eigen::MatrixXd rc = r * cov_modes;
        g.cov = rc * r.transpose();
        g.cov = 0.5 * (g.cov + g.cov.transpose()).eval();
        out.states.push_back(g);
    }
    return out;
}

OracleRun evolve_exact(const FiniteBath& bath, const SystemConfig& cfg, const GaussianState& initial,
                       double temperature, const FlowGrid& grid, bool counterterm)
{
    if (!(grid.dt > 0.0) || !(grid.t_end >= 0.0) || grid.output_stride == 0) {
        throw ConfigError("oracle grid needs dt > 0, t_end >= 0 and a positive stride");
    }
    validate_state(initial);
    const ExactEvolution ev(bath, cfg, counterterm);
    const auto steps = static_cast<std::size_t>(std::round(grid.t_end / grid.dt));
    std::vector<double> times;
    for (std::size_t i = 0; i <= steps; i += grid.output_stride) {
        times.push_back(grid.dt * static_cast<double>(i));
    }
    OracleRun run;
    run.reduced = ev.reduced(ev.initial_mean(initial), ev.initial_covariance(initial, temperature),
                             times, cfg.constants.hbar);
    run.recurrence_time = bath.recurrence_time();
    run.recurrence_warning = !times.empty() && times.back() > 0.8 * run.recurrence_time;
    return run;
}

ComparisonReport compare_master_vs_oracle(const StateTrajectory& master,
                                          const StateTrajectory& oracle, double threshold)
{
    if (master.t.size() != oracle.t.size() || master.t.empty()) {
        throw ConfigError("master and oracle trajectories have different time grids");
    }
    for (std::size_t i = 0; i < master.t.size(); ++i) {
        if (std::abs(master.t[i] - oracle.t[i]) > 1e-9 * std::max(1.0, std::abs(oracle.t[i]))) {
            throw ConfigError("master and oracle trajectories have different time grids");
        }
    }

    ComparisonReport rep;
    rep.t = oracle.t;
    // Entry errors at the first time the covariance error becomes visible.
    Eigen::Matrix4d onset = Eigen::Matrix4d::Zero();
    bool onset_seen = false;
    const auto o0 = with_ordering(oracle.states.front(), Ordering::CmRel);
    std::vector<double> log_m;
    std::vector<double> log_o;
    auto cm_norm = [&](const GaussianState& s) {
        return s.mean(0) * s.mean(0) / o0.cov(0, 0) + s.mean(1) * s.mean(1) / o0.cov(1, 1);
    };
    const double norm0 = cm_norm(o0);

    for (std::size_t k = 0; k < oracle.t.size(); ++k) {
        const auto m = with_ordering(master.states[k], Ordering::CmRel);
        const auto o = with_ordering(oracle.states[k], Ordering::CmRel);
        double cov_err = 0.0;
        double mean_err = 0.0;
        Eigen::Matrix4d entry = Eigen::Matrix4d::Zero();
        for (int i = 0; i < 4; ++i) {
            const double si = std::sqrt(std::max(o.cov(i, i), 0.0));
            mean_err = std::max(mean_err, std::abs(m.mean(i) - o.mean(i)) / si);
            for (int j = 0; j < 4; ++j) {
                const double sj = std::sqrt(std::max(o.cov(j, j), 0.0));
                const double e = std::abs(m.cov(i, j) - o.cov(i, j)) / (si * sj);
                cov_err = std::max(cov_err, e);
                entry(i, j) = e;
            }
        }
        if (!onset_seen && cov_err > 0.1 * threshold) {
            onset = entry;
            onset_seen = true;
        }
        rep.cov_error.push_back(cov_err);
        rep.mean_error.push_back(mean_err);
        rep.max_error = std::max(rep.max_error, cov_err);
        rep.max_mean_error = std::max(rep.max_mean_error, mean_err);
        if (norm0 > 0.0) {
            const double nm = cm_norm(m);
            const double no = cm_norm(o);
            if (nm > 0.0 && no > 0.0) {
                log_m.push_back(std::log(nm / norm0));
                log_o.push_back(std::log(no / norm0));
            }
        }
    }

    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < log_o.size(); ++i) {
        if (std::abs(log_o[i]) > 1e-3) {
            num += log_m[i] * log_o[i];
            den += log_o[i] * log_o[i];
        }
    }
    rep.damping_ratio = den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();

    if (rep.max_error <= threshold && rep.max_mean_error <= threshold) {
        rep.diagnosis = "none";
        return rep;
    }
    const double r = rep.damping_ratio;
    if (std::isfinite(r) && (std::abs(r - 2.0) < 0.3 || std::abs(r - 0.5) < 0.15)) {
        rep.diagnosis = "Gamma-prefactor";
        return rep;
    }
    Eigen::Index bi = 0;
    Eigen::Index bj = 0;
    onset.maxCoeff(&bi, &bj);
    const bool xp_dominant = (bi == 0 && bj == 1) || (bi == 1 && bj == 0);
    // Delta only enters the diffusion matrix, so it leaves the means exact and
    // first shows up in the centre-of-mass X-P covariance.
    if (rep.max_mean_error <= 0.1 * threshold && xp_dominant) {
        rep.diagnosis = "Delta-sign";
        return rep;
    }
    rep.diagnosis = "unclassified";
    return rep;
}

}  // namespace qbm2
