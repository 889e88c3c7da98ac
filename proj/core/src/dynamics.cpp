#include "qbm2/dynamics.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "qbm2/csv.hpp"
#include "qbm2/errors.hpp"

namespace qbm2 {

void validate(const SystemConfig& cfg)
{
    if (!(cfg.mass > 0.0) || !std::isfinite(cfg.mass)) {
        throw ConfigError("system.mass must be positive");
    }
    if (!(cfg.omega >= 0.0) || !std::isfinite(cfg.omega)) {
        throw ConfigError("system.omega must be non-negative");
    }
    if (!std::isfinite(cfg.kappa)) {
        throw ConfigError("system.kappa must be finite");
    }
    if (!(cfg.constants.hbar > 0.0) || !(cfg.constants.k_B > 0.0)) {
        throw ConfigError("hbar and k_B must be positive");
    }
}

void require_quadratic(const SystemConfig& cfg)
{
    if (cfg.kappa != 0.0 && cfg.k != 2) {
        throw UnsupportedError("relative coupling kappa (x1 - x2)^" + std::to_string(cfg.k)
                               + " is not quadratic; only k = 2 (or kappa = 0) can be evolved");
    }
}

namespace {

CmRates trajectory_rates(const TrajectoryDrive& d, double t)
{
    if (!d.trajectory) {
        throw ConfigError("trajectory drive has no trajectory");
    }
    const auto& tr = *d.trajectory;
    const auto n = static_cast<std::ptrdiff_t>(tr.size());
    const double hs = tr.grid_dt * static_cast<double>(tr.stride);
    const double x = t / hs;
    if (!(x >= -1e-9 && x <= static_cast<double>(n - 1) + 1e-9)) {
        throw RangeError("time " + std::to_string(t) + " outside the coefficient trajectory");
    }
    const double w2 = d.omega * d.omega;
    auto node_rates = [&](std::ptrdiff_t i) {
        const auto k = static_cast<std::size_t>(i);
        if (!tr.valid[k]) {
            throw SingularCoefficientError("coefficient trajectory has a gap", tr.t[k]);
        }
        return CmRates{w2 + tr.dOmega2[k], tr.Gamma[k], tr.Delta[k], tr.Sigma[k]};
    };
    const double nearest = std::round(x);
    if (std::abs(x - nearest) < 1e-9) {
        return node_rates(static_cast<std::ptrdiff_t>(nearest));
    }
    if (n < 4) {
        const auto i = static_cast<std::ptrdiff_t>(std::floor(x));
        const double u = x - static_cast<double>(i);
        const auto a = node_rates(i);
        const auto b = node_rates(i + 1);
        return {(1 - u) * a.omega2 + u * b.omega2, (1 - u) * a.Gamma + u * b.Gamma,
                (1 - u) * a.Delta + u * b.Delta, (1 - u) * a.Sigma + u * b.Sigma};
    }
    auto base = static_cast<std::ptrdiff_t>(std::floor(x)) - 1;
    base = std::max<std::ptrdiff_t>(0, std::min(base, n - 4));
    const double u = x - static_cast<double>(base);
    const double l[4] = {
        -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
        u * (u - 2.0) * (u - 3.0) / 2.0,
        -u * (u - 1.0) * (u - 3.0) / 2.0,
        u * (u - 1.0) * (u - 2.0) / 6.0,
    };
    CmRates r;
    for (int j = 0; j < 4; ++j) {
        const auto v = node_rates(base + j);
        r.omega2 += l[j] * v.omega2;
        r.Gamma += l[j] * v.Gamma;
        r.Delta += l[j] * v.Delta;
        r.Sigma += l[j] * v.Sigma;
    }
    return r;
}

std::size_t flow_steps(const FlowGrid& grid)
{
    if (!(grid.dt > 0.0) || !(grid.t_end >= 0.0)) {
        throw ConfigError("flow grid needs dt > 0 and t_end >= 0");
    }
    if (grid.output_stride == 0) {
        throw ConfigError("output stride must be at least 1");
    }
    const double x = grid.t_end / grid.dt;
    const double steps = std::round(x);
    if (std::abs(x - steps) > 1e-6) {
        throw ConfigError("t_end is not a multiple of dt");
    }
    return static_cast<std::size_t>(steps);
}

}  // namespace

CmRates cm_rates(const CmDrive& drive, double t)
{
    if (const auto* m = std::get_if<MarkovDrive>(&drive)) {
        return {m->omega_renormalized * m->omega_renormalized, m->constants.Gamma,
                m->constants.Delta, m->constants.Sigma};
    }
    return trajectory_rates(std::get<TrajectoryDrive>(drive), t);
}

CmFlow cm_moment_flow(const CmDrive& drive, double cm_mass, const FlowGrid& grid)
{
    if (!(cm_mass > 0.0)) {
        throw ConfigError("centre-of-mass mass must be positive");
    }
    const std::size_t steps = flow_steps(grid);
    const double h = grid.dt;
    const double m1 = cm_mass;

    struct Rhs {
        Eigen::Matrix2d a;
        Eigen::Matrix2d d;
    };
    auto rhs = [&](double t) {
        const auto r = cm_rates(drive, t);
        Rhs out;
        out.a << 0.0, 1.0 / m1, -m1 * r.omega2, -2.0 * r.Gamma;
        out.d << 0.0, r.Delta, r.Delta, 2.0 * r.Sigma;
        return out;
    };

    CmFlow flow;
    Eigen::Matrix2d phi = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d n = Eigen::Matrix2d::Zero();
    auto record = [&](double t) {
        flow.t.push_back(t);
        flow.Phi.push_back(phi);
        flow.N.push_back(0.5 * (n + n.transpose()));
    };
    record(0.0);
    auto r0 = rhs(0.0);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = h * static_cast<double>(i);
        const auto r1 = rhs(t + 0.5 * h);
        const auto r2 = rhs(t + h);
        auto dn = [](const Rhs& r, const Eigen::Matrix2d& m) -> Eigen::Matrix2d {
            return r.a * m + m * r.a.transpose() + r.d;
        };
        const Eigen::Matrix2d kp1 = r0.a * phi;
        const Eigen::Matrix2d kn1 = dn(r0, n);
        const Eigen::Matrix2d kp2 = r1.a * (phi + 0.5 * h * kp1);
        const Eigen::Matrix2d kn2 = dn(r1, n + 0.5 * h * kn1);
        const Eigen::Matrix2d kp3 = r1.a * (phi + 0.5 * h * kp2);
        const Eigen::Matrix2d kn3 = dn(r1, n + 0.5 * h * kn2);
        const Eigen::Matrix2d kp4 = r2.a * (phi + h * kp3);
        const Eigen::Matrix2d kn4 = dn(r2, n + h * kn3);
        phi += (h / 6.0) * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4);
        n += (h / 6.0) * (kn1 + 2.0 * kn2 + 2.0 * kn3 + kn4);
        r0 = r2;
        if ((i + 1) % grid.output_stride == 0) {
            record(h * static_cast<double>(i + 1));
        }
    }
    return flow;
}

Eigen::Matrix2d rel_propagator(const SystemConfig& cfg, double t)
{
    validate(cfg);
    require_quadratic(cfg);
    const double m2 = cfg.rel_mass();
    const double w2 = cfg.omega * cfg.omega + (cfg.kappa != 0.0 ? 2.0 * cfg.kappa / m2 : 0.0);
    Eigen::Matrix2d r;
    if (w2 > 0.0) {
        const double w = std::sqrt(w2);
        const double c = std::cos(w * t);
        const double s = std::sin(w * t);
        r << c, s / (m2 * w), -m2 * w * s, c;
    } else if (w2 == 0.0) {
        r << 1.0, t / m2, 0.0, 1.0;
    } else {
        const double w = std::sqrt(-w2);
        const double c = std::cosh(w * t);
        const double s = std::sinh(w * t);
        r << c, s / (m2 * w), m2 * w * s, c;
    }
    return r;
}

StateTrajectory evolve(const GaussianState& initial, const SystemConfig& cfg, const CmDrive& drive,
                       const FlowGrid& grid, Ordering out)
{
    validate(cfg);
    require_quadratic(cfg);
    const auto s0 = with_ordering(initial, Ordering::CmRel);
    const auto flow = cm_moment_flow(drive, cfg.cm_mass(), grid);

    StateTrajectory traj;
    traj.t = flow.t;
    traj.states.reserve(flow.t.size());
    for (std::size_t i = 0; i < flow.t.size(); ++i) {
        Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
        s.topLeftCorner<2, 2>() = flow.Phi[i];
        s.bottomRightCorner<2, 2>() = rel_propagator(cfg, flow.t[i]);
        GaussianState g;
        g.ordering = Ordering::CmRel;
        g.hbar = s0.hbar;
        g.mean = s * s0.mean;
        g.cov = s * s0.cov * s.transpose();
        g.cov.topLeftCorner<2, 2>() += flow.N[i];
        g.cov = 0.5 * (g.cov + g.cov.transpose()).eval();
        traj.states.push_back(with_ordering(g, out));
    }
    return traj;
}

CmVariances markov_free_particle_cm(double a2, double b2, double diffusion, double cm_mass, double t)
{
    const double m2 = cm_mass * cm_mass;
    return {2.0 * diffusion * t * t * t / (3.0 * m2) + b2 * t * t / m2 + a2, 2.0 * diffusion * t + b2};
}

CmVariances free_particle_rel(double c2, double d2, double rel_mass, double t)
{
    return {c2 + d2 * t * t / (rel_mass * rel_mass), d2};
}

void write_csv(std::ostream& out, const StateTrajectory& traj)
{
    std::vector<std::string> header{"t", "mean1", "mean2", "mean3", "mean4"};
    for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) {
            header.push_back("cov" + std::to_string(i + 1) + std::to_string(j + 1));
        }
    }
    CsvWriter w(out, std::move(header));
    std::vector<double> row(15);
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        const auto& s = traj.states[k];
        std::size_t c = 0;
        row[c++] = traj.t[k];
        for (int i = 0; i < 4; ++i) {
            row[c++] = s.mean(i);
        }
        for (int i = 0; i < 4; ++i) {
            for (int j = i; j < 4; ++j) {
                row[c++] = s.cov(i, j);
            }
        }
        w.row(row);
    }
}

}  // namespace qbm2
