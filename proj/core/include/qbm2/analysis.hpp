#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "qbm2/constants.hpp"
#include "qbm2/dynamics.hpp"
#include "qbm2/gaussian_state.hpp"

namespace qbm2 {

// Dimensionless coordinates x~ = position * x, P~ = momentum * P.
struct DuanScaling {
    double position = 1.0;
    double momentum = 1.0;
};

// position = (M D / hbar^3)^(1/4), momentum = (1 / (hbar M D))^(1/4).
// Throws ConfigError unless M > 0 and D > 0.
DuanScaling duan_scaling(double mass, double diffusion, const PhysicalConstants& pc = {});

struct DuanReport {
    double variance_u = 0.0;  // var(x~1 - x~2)
    double variance_v = 0.0;  // var(P~1 + P~2)
    double lhs = 0.0;
    bool separable = false;   // lhs >= 2
    DuanScaling scaling;
};

DuanReport duan_check(const GaussianState& state, const DuanScaling& scaling);
DuanReport duan_check(const GaussianState& state, double mass, double diffusion,
                      const PhysicalConstants& pc = {});

// Initial widths of the product CmRel state: a^2 = var X, b^2 = var P,
// c^2 = var x, d^2 = var p.
struct Widths {
    double a2 = 0.0;
    double b2 = 0.0;
    double c2 = 0.0;
    double d2 = 0.0;
};

struct DisentanglementTime {
    // 0 when already separable, +inf when the state never disentangles (D = 0).
    double t = 0.0;
    bool already_separable = false;
    // Separability holds once A t^2 + B t + C >= 2.
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double diffusion = 0.0;
};

// Free particles in the Fokker-Planck limit with D = 2 M1 gamma k_B T.
// Throws ConfigError when a^2 b^2 or c^2 d^2 is below hbar^2/4.
DisentanglementTime disentanglement_time(const Widths& w, double mass, double damping,
                                         double temperature, const PhysicalConstants& pc = {});

struct UncertaintyRow {
    double t = 0.0;
    double U = 0.0;        // var X var P var x var p
    double U_lab = 0.0;    // var x1 var P1 var x2 var P2
    bool lab_bound = false;  // U_lab >= U / 8
};

std::vector<UncertaintyRow> uncertainty_product(const StateTrajectory& traj);

struct UncertaintyFactors {
    double f_cm = 0.0;
    double f_rel = 0.0;
};

// Weak-damping closed forms with Omega' = sqrt(Omega^2 - gamma^2/4) and the
// width parameter delta (1 for a coherent state). Throws UnsupportedError
// for gamma >= 2 Omega.
UncertaintyFactors closed_form_fcm_frel(double omega, double damping, double temperature,
                                        double delta, double t, const PhysicalConstants& pc = {});

// Constant-coefficient centre-of-mass drive the closed forms describe:
// Gamma = gamma / 2 and Sigma = M1 Gamma hbar Omega coth(hbar Omega / 2 k_B T).
MarkovDrive weak_damping_drive(const SystemConfig& cfg, double damping, double temperature);

// Leading short-time behaviour of the same factors.
UncertaintyFactors short_time_fcm_frel(double omega, double damping, double temperature,
                                       double delta, double t, const PhysicalConstants& pc = {});

struct Visibility {
    double value = 0.0;
    bool flat = false;
};

// (max - min) / (max + min) of density samples with x in [lo, hi].
Visibility fringe_visibility(std::span<const double> x, std::span<const double> density, double lo,
                             double hi);

}  // namespace qbm2
