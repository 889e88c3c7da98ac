#include "qbm2/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "qbm2/constants.hpp"
#include "qbm2/csv.hpp"
#include "qbm2/errors.hpp"

namespace qbm2 {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// R(t_n) = int_0^{t_n} g(b) noise(t_n - b) db for every n, trapezoid with the
// endpoint derivative correction. noise = scale * nu.
std::vector<double> noise_convolution(const KernelTable& kt, double scale,
                                      const std::vector<double>& g,
                                      const std::vector<double>& dg)
{
    const double h = kt.dt();
    const auto& nu = kt.nu();
    const std::size_t n_pts = g.size();
    std::vector<double> nu_d(n_pts);
    for (std::size_t j = 0; j < n_pts; ++j) {
        nu_d[j] = kt.nu_deriv(h * static_cast<double>(j));
    }
    std::vector<double> r(n_pts, 0.0);
    for (std::size_t n = 1; n < n_pts; ++n) {
        double sum = 0.5 * (g[0] * nu[n] + g[n] * nu[0]);
        for (std::size_t k = 1; k < n; ++k) {
            sum += g[k] * nu[n - k];
        }
        const double gp_end = dg[n] * nu[0] - g[n] * nu_d[0];
        const double gp_start = dg[0] * nu[n] - g[0] * nu_d[n];
        r[n] = scale * (h * sum - h * h / 12.0 * (gp_end - gp_start));
    }
    return r;
}

double forward_slope(const std::vector<double>& y, double h)
{
    return (-11.0 * y[0] + 18.0 * y[1] - 9.0 * y[2] + 2.0 * y[3]) / (6.0 * h);
}

double backward_slope(const std::vector<double>& y, std::size_t n, double h)
{
    return (11.0 * y[n] - 18.0 * y[n - 1] + 9.0 * y[n - 2] - 2.0 * y[n - 3]) / (6.0 * h);
}

// Running integral of y from 0 with the endpoint derivative correction
// (derivatives by one-sided differences once four samples exist).
std::vector<double> cumulative_integral(const std::vector<double>& y, double h)
{
    std::vector<double> out(y.size(), 0.0);
    double trap = 0.0;
    for (std::size_t n = 1; n < y.size(); ++n) {
        trap += 0.5 * h * (y[n - 1] + y[n]);
        out[n] = trap;
        if (n >= 3 && y.size() >= 4) {
            out[n] -= h * h / 12.0 * (backward_slope(y, n, h) - forward_slope(y, h));
        }
    }
    return out;
}

// Trapezoid with endpoint correction of int_0^t eta(t - s) u(s) ds on the
// horizon grid.
double eta_moment(const KernelTable& kt, const std::vector<double>& u,
                  const std::vector<double>& du)
{
    const double h = kt.dt();
    const std::size_t n = u.size() - 1;
    const auto& eta = kt.eta();
    double sum = 0.5 * (eta[n] * u[0] + eta[0] * u[n]);
    for (std::size_t k = 1; k < n; ++k) {
        sum += eta[n - k] * u[k];
    }
    const double t = h * static_cast<double>(n);
    const double gp_end = -kt.eta_deriv(0.0) * u[n] + eta[0] * du[n];
    const double gp_start = -kt.eta_deriv(t) * u[0] + eta[n] * du[0];
    return h * sum - h * h / 12.0 * (gp_end - gp_start);
}

std::string convention_tag(int delta_sign)
{
    return std::string("fokker-planck drift A=[[0,1/M1],[-M1(Omega^2+dOmega2),-2Gamma]]; ")
        + "diffusion D=[[0," + (delta_sign > 0 ? "+" : "-") + "Delta],["
        + (delta_sign > 0 ? "+" : "-")
        + "Delta,2Sigma]]; cm kernels (2/pi)*eta,(2/pi)*nu with mode weight 2pi*C^2/(2mw); "
        + "M1=2M; Delta,Sigma from the exact noise covariance";
}

void check_sign(const CoefficientOptions& opt)
{
    if (opt.delta_sign != 1 && opt.delta_sign != -1) {
        throw ConfigError("delta_sign must be +1 or -1");
    }
    if (opt.stride == 0) {
        throw ConfigError("stride must be at least 1");
    }
}

struct DriftPair {
    double dOmega2;
    double Gamma;
    bool valid;
};

DriftPair drift_from_response(const CmResponse& r, double c, std::size_t n)
{
    const auto& fa = r.fa;
    const auto& fb = r.fb;
    const double w = fa.f[n] * fb.df[n] - fb.f[n] * fa.df[n];
    if (!(std::abs(w) > 1e-10)) {
        return {kNaN, kNaN, false};
    }
    const double d_omega2 = c * (fa.memory[n] * fb.df[n] - fb.memory[n] * fa.df[n]) / w;
    const double two_gamma = c * (fa.f[n] * fb.memory[n] - fb.f[n] * fa.memory[n]) / w;
    return {d_omega2, 0.5 * two_gamma, true};
}

// Delta and Sigma from the noise covariance and the drift at grid index n.
std::pair<double, double> diffusion_from_response(const CmResponse& r, double omega,
                                                  double d_omega2, double gamma, std::size_t n)
{
    const double m1 = r.cm_mass;
    const double a21 = -m1 * (omega * omega + d_omega2);
    const double a22 = -2.0 * gamma;
    const double delta = r.dNxp[n] - r.Npp[n] / m1 - a21 * r.Nxx[n] - a22 * r.Nxp[n];
    const double two_sigma = r.dNpp[n] - 2.0 * (a21 * r.Nxp[n] + a22 * r.Npp[n]);
    return {delta, 0.5 * two_sigma};
}

}  // namespace

CmResponse cm_response(const KernelTable& kt, double mass, double omega, double t_max)
{
    CmResponse r;
    r.dt = kt.dt();
    r.cm_mass = 2.0 * mass;
    r.fa = solve_homogeneous_ivp(kt, mass, omega, 1.0, 0.0, t_max);
    r.fb = solve_homogeneous_ivp(kt, mass, omega, 0.0, 1.0, t_max);

    const double noise_scale = kt.constants().hbar * kCmKernelWeight;
    const auto rg = noise_convolution(kt, noise_scale, r.fb.f, r.fb.df);
    const auto rdg = noise_convolution(kt, noise_scale, r.fb.df, r.fb.ddf);
    const std::size_t n = r.size();
    const double m1 = r.cm_mass;
    r.dNxx.resize(n);
    r.dNxp.resize(n);
    r.dNpp.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = r.fb.f[i];
        const double dg = r.fb.df[i];
        r.dNxx[i] = 2.0 / (m1 * m1) * g * rg[i];
        r.dNxp[i] = (g * rdg[i] + dg * rg[i]) / m1;
        r.dNpp[i] = 2.0 * dg * rdg[i];
    }
    r.Nxx = cumulative_integral(r.dNxx, r.dt);
    r.Nxp = cumulative_integral(r.dNxp, r.dt);
    r.Npp = cumulative_integral(r.dNpp, r.dt);
    return r;
}

Coefficients coefficients_at_horizon(const KernelTable& kt, double mass, double omega, double t,
                                     const CoefficientOptions& opt)
{
    check_sign(opt);
    const auto ef = build_elementary(kt, mass, omega, t);
    const std::size_t n = ef.size() - 1;
    const double du1t = ef.du1[n];
    double scale = 1.0;
    for (double v : ef.du1) {
        scale = std::max(scale, std::abs(v));
    }
    if (!(std::abs(du1t) > 1e-12 * scale)) {
        throw SingularCoefficientError("coefficients diverge where du1(t) = 0", ef.horizon);
    }
    const double c = memory_coupling(mass);
    const double j1 = eta_moment(kt, ef.u1, ef.du1);
    const double j2 = eta_moment(kt, ef.u2, ef.du2);

    Coefficients out;
    out.dOmega2 = c * (j2 - j1 * ef.du2[n] / du1t);
    out.Gamma = 0.5 * c * j1 / du1t;

    const auto resp = cm_response(kt, mass, omega, ef.horizon);
    const auto [delta, sigma] = diffusion_from_response(resp, omega, out.dOmega2, out.Gamma, n);
    out.Delta = opt.delta_sign * delta;
    out.Sigma = sigma;
    return out;
}

CoefficientTrajectory coefficient_trajectory(const KernelTable& kt, double mass, double omega,
                                             double t_max, const CoefficientOptions& opt)
{
    check_sign(opt);
    const auto resp = cm_response(kt, mass, omega, t_max);
    const double c = memory_coupling(mass);

    CoefficientTrajectory traj;
    traj.grid_dt = resp.dt;
    traj.stride = opt.stride;
    traj.convention_tag = convention_tag(opt.delta_sign);
    for (std::size_t n = 0; n < resp.size(); n += opt.stride) {
        traj.t.push_back(resp.dt * static_cast<double>(n));
        const auto drift = drift_from_response(resp, c, n);
        if (!drift.valid) {
            traj.dOmega2.push_back(kNaN);
            traj.Gamma.push_back(kNaN);
            traj.Delta.push_back(kNaN);
            traj.Sigma.push_back(kNaN);
            traj.valid.push_back(false);
            continue;
        }
        const auto [delta, sigma] =
            diffusion_from_response(resp, omega, drift.dOmega2, drift.Gamma, n);
        traj.dOmega2.push_back(drift.dOmega2);
        traj.Gamma.push_back(drift.Gamma);
        traj.Delta.push_back(opt.delta_sign * delta);
        traj.Sigma.push_back(sigma);
        traj.valid.push_back(true);
    }
    return traj;
}

MarkovConstants markov_limit_constants(double cm_mass, double damping, double temperature,
                                    const PhysicalConstants& pc)
{
    if (!(cm_mass > 0.0)) {
        throw ConfigError("centre-of-mass mass must be positive");
    }
    if (!(damping >= 0.0)) {
        throw ConfigError("damping must be non-negative");
    }
    if (!(temperature >= 0.0)) {
        throw ConfigError("temperature must be non-negative");
    }
    return {damping, 0.0, 2.0 * cm_mass * damping * pc.k_B * temperature};
}

void write_csv(std::ostream& out, const CoefficientTrajectory& traj)
{
    CsvWriter w(out, {"t", "dOmega2", "Gamma", "Delta", "Sigma"});
    for (std::size_t i = 0; i < traj.size(); ++i) {
        w.row({traj.t[i], traj.dOmega2[i], traj.Gamma[i], traj.Delta[i], traj.Sigma[i]});
    }
}

}  // namespace qbm2
