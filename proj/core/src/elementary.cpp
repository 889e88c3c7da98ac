#include "qbm2/elementary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "qbm2/constants.hpp"
#include "qbm2/csv.hpp"
#include "qbm2/errors.hpp"

namespace qbm2 {
namespace {

std::size_t grid_steps(double t, double dt, const char* what)
{
    const double x = t / dt;
    const double steps = std::round(x);
    if (std::abs(x - steps) > 1e-6) {
        throw ConfigError(std::string(what) + " " + std::to_string(t)
                          + " is not a multiple of dt = " + std::to_string(dt));
    }
    return static_cast<std::size_t>(steps);
}

void check_oscillator(double mass, double omega)
{
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw ConfigError("oscillator mass must be positive");
    }
    if (!(omega >= 0.0) || !std::isfinite(omega)) {
        throw ConfigError("oscillator frequency must be non-negative");
    }
}

}  // namespace

double memory_coupling(double mass)
{
    // Centre-of-mass mass 2M sees the kernel kCmKernelWeight * eta.
    return 2.0 * kCmKernelWeight / (2.0 * mass);
}

double static_frequency_shift(const SpectralDensity& sd, double mass)
{
    double integral = 0.0;
    if (sd.kind() == SpectralKind::OhmicGaussianCutoff) {
        const auto& p = sd.ohmic_params();
        integral = p.mass_scale * p.damping * p.cutoff * std::sqrt(std::numbers::pi) / 2.0;
    } else {
        for (const auto& m : sd.modes()) {
            integral += mode_weight(m) / m.frequency;
        }
    }
    return -memory_coupling(mass) * integral;
}

double counterterm_frequency(const SpectralDensity& sd, double mass, double omega)
{
    return std::sqrt(omega * omega - static_frequency_shift(sd, mass));
}

IvpSolution solve_homogeneous_ivp(const KernelTable& kt, double mass, double omega, double f0,
                                  double df0, double horizon)
{
    check_oscillator(mass, omega);
    if (!(horizon >= 0.0)) {
        throw ConfigError("horizon must be non-negative");
    }
    const double h = kt.dt();
    const std::size_t steps = grid_steps(horizon, h, "horizon");
    if (steps + 1 > kt.size()) {
        throw RangeError("horizon " + std::to_string(horizon) + " exceeds the kernel table (t_max = "
                         + std::to_string(kt.t_max()) + ")");
    }
    const std::size_t n_pts = steps + 1;
    const double c = memory_coupling(mass);
    const double w2 = omega * omega;

    const std::vector<double>& eta = kt.eta();
    std::vector<double> eta_half(n_pts);
    std::vector<double> etap(n_pts);
    for (std::size_t j = 0; j < n_pts; ++j) {
        etap[j] = kt.eta_deriv(h * static_cast<double>(j));
        if (j + 1 < n_pts) {
            eta_half[j] = kt.eta_interp(h * (static_cast<double>(j) + 0.5));
        }
    }
    const double eta_quarter = n_pts > 1 ? kt.eta_interp(0.25 * h) : 0.0;
    const double etap_half0 = n_pts > 1 ? kt.eta_deriv(0.5 * h) : 0.0;

    IvpSolution sol;
    sol.dt = h;
    sol.f.assign(n_pts, 0.0);
    sol.df.assign(n_pts, 0.0);
    sol.ddf.assign(n_pts, 0.0);
    sol.memory.assign(n_pts, 0.0);
    auto& f = sol.f;
    auto& df = sol.df;
    auto& a = sol.ddf;
    auto& m = sol.memory;
    f[0] = f0;
    df[0] = df0;
    a[0] = -w2 * f0;

    const double em = h * h / 12.0;
    for (std::size_t n = 0; n + 1 < n_pts; ++n) {
        // History over [0, s_n] for the stage at s_n + h/2 and at s_{n+1}.
        double half_sum = 0.0;
        double one_sum = 0.0;
        for (std::size_t k = 0; k <= n; ++k) {
            const double wk = (k == 0 || k == n) ? 0.5 : 1.0;
            half_sum += wk * eta_half[n - k] * f[k];
            one_sum += wk * eta[n + 1 - k] * f[k];
        }
        if (n == 0) {
            half_sum = 0.0;
            one_sum = 0.0;
        }
        double half_hist = h * half_sum;
        double one_hist = h * one_sum;
        if (n > 0) {
            const double gp_end_half = -etap_half0 * f[n] + eta_half[0] * df[n];
            const double gp_start_half = -kt.eta_deriv(h * (static_cast<double>(n) + 0.5)) * f[0]
                + eta_half[n] * df[0];
            half_hist -= em * (gp_end_half - gp_start_half);
            const double gp_end_one = -etap[1] * f[n] + eta[1] * df[n];
            const double gp_start_one = -etap[n + 1] * f[0] + eta[n + 1] * df[0];
            one_hist -= em * (gp_end_one - gp_start_one);
        }
        // Partial step by Simpson with a Taylor predictor for f.
        auto taylor = [&](double dtau) { return f[n] + dtau * df[n] + 0.5 * dtau * dtau * a[n]; };
        const double half_local =
            (0.5 * h / 6.0) * (eta_half[0] * f[n] + 4.0 * eta_quarter * taylor(0.25 * h)
                               + eta[0] * taylor(0.5 * h));
        const double one_local =
            (h / 6.0) * (eta[1] * f[n] + 4.0 * eta_half[0] * taylor(0.5 * h) + eta[0] * taylor(h));
        const double m_half = half_hist + half_local;
        const double m_one = one_hist + one_local;

        const double f2 = f[n] + 0.5 * h * df[n];
        const double v2 = df[n] + 0.5 * h * a[n];
        const double a2 = -w2 * f2 - c * m_half;
        const double f3 = f[n] + 0.5 * h * v2;
        const double v3 = df[n] + 0.5 * h * a2;
        const double a3 = -w2 * f3 - c * m_half;
        const double f4 = f[n] + h * v3;
        const double v4 = df[n] + h * a3;
        const double a4 = -w2 * f4 - c * m_one;

        f[n + 1] = f[n] + (h / 6.0) * (df[n] + 2.0 * v2 + 2.0 * v3 + v4);
        df[n + 1] = df[n] + (h / 6.0) * (a[n] + 2.0 * a2 + 2.0 * a3 + a4);

        // Memory at the new grid point over [0, s_{n+1}].
        double sum = 0.0;
        for (std::size_t k = 0; k <= n + 1; ++k) {
            const double wk = (k == 0 || k == n + 1) ? 0.5 : 1.0;
            sum += wk * eta[n + 1 - k] * f[k];
        }
        const double gp_end = -etap[0] * f[n + 1] + eta[0] * df[n + 1];
        const double gp_start = -etap[n + 1] * f[0] + eta[n + 1] * df[0];
        m[n + 1] = h * sum - em * (gp_end - gp_start);
        a[n + 1] = -w2 * f[n + 1] - c * m[n + 1];
    }
    return sol;
}

double relative_frequency(double mass, double omega, double kappa)
{
    check_oscillator(mass, omega);
    const double m2 = 0.5 * mass;
    const double w2 = omega * omega + 2.0 * kappa / m2;
    if (!(w2 >= 0.0)) {
        throw ConfigError("relative coupling makes the relative frequency imaginary");
    }
    return std::sqrt(w2);
}

ElementaryFunctions build_elementary(const KernelTable& kt, double mass, double omega, double t,
                                     std::optional<double> omega_free)
{
    check_oscillator(mass, omega);
    if (!(t > 0.0)) {
        throw ConfigError("elementary functions need a positive horizon");
    }
    const double h = kt.dt();
    const std::size_t steps = grid_steps(t, h, "horizon");
    if (steps == 0) {
        throw ConfigError("elementary functions need a horizon of at least one step");
    }
    const double horizon = h * static_cast<double>(steps);
    const auto fa = solve_homogeneous_ivp(kt, mass, omega, 1.0, 0.0, horizon);
    const auto fb = solve_homogeneous_ivp(kt, mass, omega, 0.0, 1.0, horizon);

    const double fat = fa.f[steps];
    const double fbt = fb.f[steps];
    double scale = 0.0;
    for (double v : fb.f) {
        scale = std::max(scale, std::abs(v));
    }
    if (!(std::abs(fbt) > 1e-10 * scale)) {
        throw DegenerateHorizonError("boundary-value problem has no unique solution", horizon);
    }

    ElementaryFunctions ef;
    ef.horizon = horizon;
    ef.dt = h;
    ef.mass = mass;
    ef.omega = omega;
    ef.omega_free = omega_free.value_or(omega);
    if (!(ef.omega_free >= 0.0) || !std::isfinite(ef.omega_free)) {
        throw ConfigError("free frequency must be non-negative");
    }
    const std::size_t n = steps + 1;
    ef.u1.resize(n);
    ef.u2.resize(n);
    ef.du1.resize(n);
    ef.du2.resize(n);
    ef.w1.resize(n);
    ef.w2.resize(n);
    ef.dw1.resize(n);
    ef.dw2.resize(n);
    const double ratio = fat / fbt;
    for (std::size_t i = 0; i < n; ++i) {
        ef.u1[i] = fa.f[i] - ratio * fb.f[i];
        ef.du1[i] = fa.df[i] - ratio * fb.df[i];
        ef.u2[i] = fb.f[i] / fbt;
        ef.du2[i] = fb.df[i] / fbt;
    }

    const double wf = ef.omega_free;
    const double sin_t = std::sin(wf * horizon);
    if (wf > 0.0 && std::abs(sin_t) <= 1e-10) {
        throw DegenerateHorizonError("free boundary-value problem has no unique solution", horizon);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double s = h * static_cast<double>(i);
        if (wf == 0.0) {
            ef.w1[i] = (horizon - s) / horizon;
            ef.w2[i] = s / horizon;
            ef.dw1[i] = -1.0 / horizon;
            ef.dw2[i] = 1.0 / horizon;
        } else {
            ef.w1[i] = std::sin(wf * (horizon - s)) / sin_t;
            ef.w2[i] = std::sin(wf * s) / sin_t;
            ef.dw1[i] = -wf * std::cos(wf * (horizon - s)) / sin_t;
            ef.dw2[i] = wf * std::cos(wf * s) / sin_t;
        }
    }
    ef.g0 = fb.f;
    ef.dg0 = fb.df;
    return ef;
}

double green_retarded(const ElementaryFunctions& ef, double s, double tau)
{
    const double slack = 1e-12 * ef.horizon;
    if (!(tau >= -slack && tau <= ef.horizon + slack && s >= -slack && s <= ef.horizon + slack)) {
        throw RangeError("retarded Green function evaluated outside [0, t]");
    }
    if (s <= tau) {
        return 0.0;
    }
    const double x = (s - tau) / ef.dt;
    const auto last = ef.g0.size() - 1;
    const auto i = std::min(static_cast<std::size_t>(x), last - 1);
    const double w = std::min(x - static_cast<double>(i), 1.0);
    return (1.0 - w) * ef.g0[i] + w * ef.g0[i + 1];
}

void write_csv(std::ostream& out, const ElementaryFunctions& ef)
{
    CsvWriter w(out, {"s", "u1", "u2", "du1", "du2", "w1", "w2", "g0"});
    for (std::size_t i = 0; i < ef.size(); ++i) {
        w.row({ef.dt * static_cast<double>(i), ef.u1[i], ef.u2[i], ef.du1[i], ef.du2[i], ef.w1[i],
               ef.w2[i], ef.g0[i]});
    }
}

}  // namespace qbm2
