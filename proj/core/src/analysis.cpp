#include "qbm2/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qbm2/errors.hpp"

namespace qbm2 {

DuanScaling duan_scaling(double mass, double diffusion, const PhysicalConstants& pc)
{
    if (!(mass > 0.0)) {
        throw ConfigError("Duan scaling needs a positive mass");
    }
    if (!(diffusion > 0.0)) {
        throw ConfigError("Duan scaling needs D > 0; pass an explicit scaling instead");
    }
    const double h = pc.hbar;
    return {std::pow(mass * diffusion / (h * h * h), 0.25), std::pow(1.0 / (h * mass * diffusion), 0.25)};
}

DuanReport duan_check(const GaussianState& state, const DuanScaling& scaling)
{
    const auto lab = with_ordering(state, Ordering::Lab);
    const auto& c = lab.cov;
    // (x1, P1, x2, P2)
    const double var_rel = c(0, 0) + c(2, 2) - 2.0 * c(0, 2);
    const double var_tot = c(1, 1) + c(3, 3) + 2.0 * c(1, 3);
    DuanReport r;
    r.scaling = scaling;
    r.variance_u = scaling.position * scaling.position * var_rel;
    r.variance_v = scaling.momentum * scaling.momentum * var_tot;
    r.lhs = r.variance_u + r.variance_v;
    r.separable = r.lhs >= 2.0;
    return r;
}

DuanReport duan_check(const GaussianState& state, double mass, double diffusion,
                      const PhysicalConstants& pc)
{
    return duan_check(state, duan_scaling(mass, diffusion, pc));
}

DisentanglementTime disentanglement_time(const Widths& w, double mass, double damping,
                                         double temperature, const PhysicalConstants& pc)
{
    const double h = pc.hbar;
    if (!(mass > 0.0) || !(damping >= 0.0) || !(temperature >= 0.0)) {
        throw ConfigError("disentanglement time needs M > 0, gamma >= 0 and T >= 0");
    }
    const double floor = h * h / 4.0 * (1.0 - 1e-12);
    if (!(w.a2 * w.b2 >= floor) || !(w.c2 * w.d2 >= floor)) {
        throw ConfigError("initial widths violate a^2 b^2 >= hbar^2/4 or c^2 d^2 >= hbar^2/4");
    }
    DisentanglementTime out;
    const double d = 2.0 * (2.0 * mass) * damping * pc.k_B * temperature;
    out.diffusion = d;
    if (d == 0.0) {
        out.t = std::numeric_limits<double>::infinity();
        return out;
    }
    const double root_pos = std::sqrt(mass * d / (h * h * h));
    out.A = 4.0 * w.d2 / (mass * mass) * root_pos;
    out.B = 2.0 * std::sqrt(d / (h * mass));
    out.C = w.b2 / std::sqrt(h * mass * d) + w.c2 * root_pos;
    if (out.C >= 2.0) {
        out.already_separable = true;
        out.t = 0.0;
        return out;
    }
    const double disc = out.B * out.B - 4.0 * out.A * out.C + 8.0 * out.A;
    out.t = (-out.B + std::sqrt(disc)) / (2.0 * out.A);
    return out;
}

std::vector<UncertaintyRow> uncertainty_product(const StateTrajectory& traj)
{
    std::vector<UncertaintyRow> rows;
    rows.reserve(traj.t.size());
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        const auto cm = with_ordering(traj.states[k], Ordering::CmRel);
        const auto lab = with_ordering(traj.states[k], Ordering::Lab);
        UncertaintyRow r;
        r.t = traj.t[k];
        r.U = cm.cov(0, 0) * cm.cov(1, 1) * cm.cov(2, 2) * cm.cov(3, 3);
        r.U_lab = lab.cov(0, 0) * lab.cov(1, 1) * lab.cov(2, 2) * lab.cov(3, 3);
        r.lab_bound = r.U_lab >= r.U / 8.0;
        rows.push_back(r);
    }
    return rows;
}

namespace {

struct WeakDamping {
    double omega_p;
    double coth;
};

WeakDamping weak_damping(double omega, double damping, double temperature,
                         const PhysicalConstants& pc)
{
    if (!(omega > 0.0) || !(damping >= 0.0) || !(temperature >= 0.0)) {
        throw ConfigError("closed form needs Omega > 0, gamma >= 0 and T >= 0");
    }
    if (damping >= 2.0 * omega) {
        throw UnsupportedError("closed form holds only for gamma < 2 Omega");
    }
    const double wp = std::sqrt(omega * omega - 0.25 * damping * damping);
    const double coth =
        temperature == 0.0 ? 1.0 : 1.0 / std::tanh(pc.hbar * wp / (2.0 * pc.k_B * temperature));
    return {wp, coth};
}

}  // namespace

UncertaintyFactors closed_form_fcm_frel(double omega, double damping, double temperature,
                                        double delta, double t, const PhysicalConstants& pc)
{
    if (!(delta > 0.0)) {
        throw ConfigError("width parameter delta must be positive");
    }
    const auto [wp, c] = weak_damping(omega, damping, temperature, pc);
    const double h2 = pc.hbar * pc.hbar;
    const double g = damping;
    const double e = std::exp(-g * t);
    const double s2 = std::sin(2.0 * wp * t);
    const double s1 = std::sin(wp * t);

    const double first = e + c * (1.0 - e);
    const double term1 = h2 / 4.0 * first * first;
    const double term2 = h2 * c
        * ((1.0 - delta) * (1.0 - delta) / (4.0 * delta) * (1.0 - e)
           - (1.0 - delta * delta) * g / (8.0 * wp * delta) * s2)
        * e;
    const double inner = (1.0 - delta * delta) / (4.0 * delta) * s2
        + g / (2.0 * wp) * (c - (1.0 + delta * delta) / (2.0 * delta)) * s1 * s1;
    const double term3 = h2 * inner * inner * std::exp(-2.0 * g * t);

    const double sr = std::sin(2.0 * omega * t);
    const double d2 = delta * delta;
    const double f_rel = h2 / 4.0 * (1.0 + (1.0 - d2) * (1.0 - d2) * sr * sr / (4.0 * d2));
    return {term1 + term2 + term3, f_rel};
}

MarkovDrive weak_damping_drive(const SystemConfig& cfg, double damping, double temperature)
{
    validate(cfg);
    if (!(damping >= 0.0) || !(temperature >= 0.0)) {
        throw ConfigError("weak-damping drive needs gamma >= 0 and T >= 0");
    }
    const auto& pc = cfg.constants;
    const double x = pc.hbar * cfg.omega / (2.0 * pc.k_B * temperature);
    const double energy = temperature == 0.0 || x > 350.0 ? pc.hbar * cfg.omega
                          : x < 1e-8                     ? 2.0 * pc.k_B * temperature
                                                         : pc.hbar * cfg.omega / std::tanh(x);
    MarkovDrive drive;
    drive.constants.Gamma = 0.5 * damping;
    drive.constants.Sigma = cfg.cm_mass() * drive.constants.Gamma * energy;
    drive.omega_renormalized = cfg.omega;
    return drive;
}

UncertaintyFactors short_time_fcm_frel(double omega, double damping, double temperature,
                                       double delta, double t, const PhysicalConstants& pc)
{
    const auto [wp, c] = weak_damping(omega, damping, temperature, pc);
    (void)wp;
    const double h2 = pc.hbar * pc.hbar;
    return {h2 / 4.0 * (1.0 + 2.0 * (delta * c - 1.0) * damping * t), h2 / 4.0};
}

Visibility fringe_visibility(std::span<const double> x, std::span<const double> density, double lo,
                             double hi)
{
    if (x.size() != density.size()) {
        throw ConfigError("fringe visibility needs matching x and density samples");
    }
    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= lo && x[i] <= hi) {
            mx = std::max(mx, density[i]);
            mn = std::min(mn, density[i]);
        }
    }
    if (!std::isfinite(mx)) {
        throw ConfigError("fringe window contains no samples");
    }
    if (mx - mn <= 1e-12 * std::max(std::abs(mx), std::numeric_limits<double>::min())
        || mx + mn <= 0.0) {
        return {0.0, true};
    }
    return {(mx - mn) / (mx + mn), false};
}

}  // namespace qbm2
