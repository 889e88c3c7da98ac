#include "qbm2/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qbm2/csv.hpp"
#include "qbm2/errors.hpp"

namespace qbm2 {
namespace {

// coth(hbar w / 2 k_B T), with the T = 0 limit.
double thermal_factor(double omega, double temperature, const PhysicalConstants& pc)
{
    if (temperature == 0.0) {
        return 1.0;
    }
    return 1.0 / std::tanh(pc.hbar * omega / (2.0 * pc.k_B * temperature));
}

// w coth(hbar w / 2 k_B T), finite as w -> 0.
double omega_thermal(double omega, double temperature, const PhysicalConstants& pc)
{
    if (temperature == 0.0) {
        return omega;
    }
    const double scale = 2.0 * pc.k_B * temperature / pc.hbar;
    const double x = omega / scale;
    if (x < 1e-6) {
        return scale * (1.0 + x * x / 3.0);
    }
    return omega / std::tanh(x);
}

void check_temperature(double temperature)
{
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
        throw ConfigError("temperature must be finite and non-negative");
    }
}

double ohmic_noise(const OhmicGaussianCutoff& p, double temperature, double s,
                   const PhysicalConstants& pc, double rel_tol)
{
    using boost::math::quadrature::gauss_kronrod;
    const double lam = p.cutoff;
    auto integrand = [&](double w) {
        const double x = w / lam;
        return p.mass_scale * p.damping * omega_thermal(w, temperature, pc) * std::exp(-x * x)
            * std::cos(w * s);
    };
    // exp(-x^2) is below 1e-18 past 6.5 cutoffs; panels resolve about half an
    // oscillation of cos(w s) each.
    const double upper = 6.5 * lam;
    double width = 0.5 * lam;
    if (s > 0.0) {
        width = std::min(width, std::numbers::pi / s);
    }
    const auto panels = static_cast<std::size_t>(std::ceil(upper / width));
    width = upper / static_cast<double>(panels);

    double total = 0.0;
    double total_err = 0.0;
    double total_l1 = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
        const double a = width * static_cast<double>(k);
        const double b = a + width;
        double err = 0.0;
        double l1 = 0.0;
        total += gauss_kronrod<double, 31>::integrate(integrand, a, b, 12, rel_tol, &err, &l1);
        total_err += err;
        total_l1 += l1;
    }
    if (!(total_err <= rel_tol * total_l1) || !std::isfinite(total)) {
        throw QuadratureError("noise kernel quadrature did not converge at s = " + std::to_string(s),
                              total, total_err, total_l1);
    }
    return total;
}

}  // namespace

double dissipation_kernel(const SpectralDensity& sd, double s)
{
    if (!(s >= 0.0)) {
        throw ConfigError("dissipation kernel needs s >= 0");
    }
    if (sd.kind() == SpectralKind::OhmicGaussianCutoff) {
        const auto& p = sd.ohmic_params();
        const double lam = p.cutoff;
        const double x = 0.5 * lam * s;
        return -p.mass_scale * p.damping * 0.25 * std::sqrt(std::numbers::pi) * lam * lam * lam * s
            * std::exp(-x * x);
    }
    double sum = 0.0;
    for (const auto& m : sd.modes()) {
        sum -= mode_weight(m) * std::sin(m.frequency * s);
    }
    return sum;
}

double noise_kernel(const SpectralDensity& sd, double temperature, double s,
                    const PhysicalConstants& pc, double rel_tol)
{
    if (!(s >= 0.0)) {
        throw ConfigError("noise kernel needs s >= 0");
    }
    check_temperature(temperature);
    if (sd.kind() == SpectralKind::OhmicGaussianCutoff) {
        return ohmic_noise(sd.ohmic_params(), temperature, s, pc, rel_tol);
    }
    double sum = 0.0;
    for (const auto& m : sd.modes()) {
        sum += mode_weight(m) * thermal_factor(m.frequency, temperature, pc)
            * std::cos(m.frequency * s);
    }
    return sum;
}

KernelTable::KernelTable(double dt, std::vector<double> eta, std::vector<double> nu,
                         double temperature, PhysicalConstants pc)
    : dt_(dt)
    , eta_(std::move(eta))
    , nu_(std::move(nu))
    , temperature_(temperature)
    , pc_(pc)
{
    if (!(dt_ > 0.0)) {
        throw ConfigError("kernel table needs dt > 0");
    }
    if (eta_.size() != nu_.size() || eta_.size() < 2) {
        throw ConfigError("kernel table needs matching eta and nu with at least two points");
    }
}

double KernelTable::eta_at(std::ptrdiff_t i) const
{
    const auto n = static_cast<std::ptrdiff_t>(eta_.size());
    if (i <= -n || i >= n) {
        throw RangeError("kernel index " + std::to_string(i) + " outside the table");
    }
    return i >= 0 ? eta_[static_cast<std::size_t>(i)] : -eta_[static_cast<std::size_t>(-i)];
}

double KernelTable::nu_at(std::ptrdiff_t i) const
{
    const auto n = static_cast<std::ptrdiff_t>(nu_.size());
    if (i <= -n || i >= n) {
        throw RangeError("kernel index " + std::to_string(i) + " outside the table");
    }
    return nu_[static_cast<std::size_t>(i < 0 ? -i : i)];
}

namespace {

struct Stencil {
    std::ptrdiff_t base;
    double t;
};

// Four consecutive nodes around x, kept inside the reflected table.
Stencil cubic_stencil(double x, std::ptrdiff_t n)
{
    auto base = static_cast<std::ptrdiff_t>(std::floor(x)) - 1;
    base = std::max(std::min(base, n - 4), -(n - 1));
    return {base, x - static_cast<double>(base)};
}

}  // namespace

double KernelTable::eta_interp(double s) const
{
    const double x = s / dt_;
    const auto n = static_cast<std::ptrdiff_t>(eta_.size());
    if (!(std::abs(x) <= static_cast<double>(n - 1) + 1e-9)) {
        throw RangeError("kernel time " + std::to_string(s) + " outside the table");
    }
    if (n < 3) {
        const double w = std::abs(x);
        const double v = (1.0 - w) * eta_[0] + w * eta_[1];
        return x < 0.0 ? -v : v;
    }
    const auto [base, t] = cubic_stencil(x, n);
    const double l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    const double l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    const double l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    const double l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    return l0 * eta_at(base) + l1 * eta_at(base + 1) + l2 * eta_at(base + 2)
        + l3 * eta_at(base + 3);
}

double KernelTable::eta_deriv(double s) const
{
    const double x = s / dt_;
    const auto n = static_cast<std::ptrdiff_t>(eta_.size());
    if (!(std::abs(x) <= static_cast<double>(n - 1) + 1e-9)) {
        throw RangeError("kernel time " + std::to_string(s) + " outside the table");
    }
    if (n < 3) {
        return (eta_[1] - eta_[0]) / dt_;
    }
    const auto [base, t] = cubic_stencil(x, n);
    const double d0 = -(3.0 * t * t - 12.0 * t + 11.0) / 6.0;
    const double d1 = (3.0 * t * t - 10.0 * t + 6.0) / 2.0;
    const double d2 = -(3.0 * t * t - 8.0 * t + 3.0) / 2.0;
    const double d3 = (3.0 * t * t - 6.0 * t + 2.0) / 6.0;
    return (d0 * eta_at(base) + d1 * eta_at(base + 1) + d2 * eta_at(base + 2)
            + d3 * eta_at(base + 3))
        / dt_;
}

double KernelTable::nu_deriv(double s) const
{
    const double x = s / dt_;
    const auto n = static_cast<std::ptrdiff_t>(nu_.size());
    if (!(std::abs(x) <= static_cast<double>(n - 1) + 1e-9)) {
        throw RangeError("kernel time " + std::to_string(s) + " outside the table");
    }
    if (x == 0.0) {
        return 0.0;
    }
    if (n < 3) {
        const double d = (nu_[1] - nu_[0]) / dt_;
        return x < 0.0 ? -d : d;
    }
    const auto [base, t] = cubic_stencil(x, n);
    const double d0 = -(3.0 * t * t - 12.0 * t + 11.0) / 6.0;
    const double d1 = (3.0 * t * t - 10.0 * t + 6.0) / 2.0;
    const double d2 = -(3.0 * t * t - 8.0 * t + 3.0) / 2.0;
    const double d3 = (3.0 * t * t - 6.0 * t + 2.0) / 6.0;
    return (d0 * nu_at(base) + d1 * nu_at(base + 1) + d2 * nu_at(base + 2)
            + d3 * nu_at(base + 3))
        / dt_;
}

KernelTable tabulate_kernels(const SpectralDensity& sd, double temperature, double t_max, double dt,
                             const PhysicalConstants& pc, std::size_t max_points)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("dt must be positive");
    }
    if (!(t_max >= dt) || !std::isfinite(t_max)) {
        throw ConfigError("t_max must be at least dt");
    }
    check_temperature(temperature);
    const double steps = std::round(t_max / dt);
    if (steps + 1.0 > static_cast<double>(max_points)) {
        throw ResourceError("kernel grid of " + std::to_string(steps + 1.0)
                            + " points exceeds the cap of " + std::to_string(max_points));
    }
    const auto n = static_cast<std::size_t>(steps) + 1;
    std::vector<double> eta(n);
    std::vector<double> nu(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = dt * static_cast<double>(i);
        eta[i] = dissipation_kernel(sd, s);
        nu[i] = noise_kernel(sd, temperature, s, pc);
    }
    return KernelTable(dt, std::move(eta), std::move(nu), temperature, pc);
}

void write_csv(std::ostream& out, const KernelTable& kt)
{
    CsvWriter w(out, {"s", "eta", "nu"});
    for (std::size_t i = 0; i < kt.size(); ++i) {
        w.row({kt.dt() * static_cast<double>(i), kt.eta()[i], kt.nu()[i]});
    }
}

}  // namespace qbm2
