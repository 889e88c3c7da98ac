#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "qbm2/constants.hpp"
#include "qbm2/elementary.hpp"
#include "qbm2/kernels.hpp"

namespace qbm2 {

using cplx = std::complex<double>;
using Matrix4c = Eigen::Matrix<cplx, 4, 4>;
using Vector4c = Eigen::Matrix<cplx, 4, 1>;

// Endpoint data of the two-particle reduced propagator at one horizon.
//
// Stored in reduced units: time unchanged, lengths in multiples of
// sqrt(hbar / M), actions in multiples of hbar. In these units the kernel is
//     J = Ntilde exp(i/2 S_I - S_R)
// with S_I built from b1..b8 over sum/difference coordinates and
//     S_R = a11 (x+_t - y+_t)^2 + a22 (x+_0 - y+_0)^2 + a12 (x+_0 - y+_0)(x+_t - y+_t).
// a11 = 1/2 int int u1 nu u1 and a22 = 1/2 int int u2 nu u2 with nu in reduced
// units; a12 is the whole cross term int int u1 nu u2.
struct PropagatorData {
    double horizon = 0.0;
    std::array<double, 8> b{};  // b[0] is b1
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;
    // sqrt(hbar / M): physical length of one reduced unit.
    double length_unit = 1.0;
    double hbar = 1.0;

    double bi(int i) const { return b.at(static_cast<std::size_t>(i - 1)); }
    // |b3 b7| / pi^2
    double normalization() const;
};

// Throws ConfigError when ef and kt disagree on the grid and
// DegenerateHorizonError when the endpoint slopes are not finite.
PropagatorData build_propagator(const ElementaryFunctions& ef, const KernelTable& kt);

// exp(-x^T G x + F^T x + c) over x in R^4.
struct GaussianExponent4 {
    Matrix4c G = Matrix4c::Zero();
    Vector4c F = Vector4c::Zero();
    cplx c{0.0, 0.0};
};

// sqrt(det G) continued from the real positive-definite case. Throws
// DomainError unless Re G is positive definite.
cplx sqrt_det(const Matrix4c& G);

// pi^2 / sqrt(det G) exp(c + F^T G^{-1} F / 4).
cplx gaussian_integrate_4(const GaussianExponent4& e);

// psi_{+}(x) = N exp(-(x - L0)^2 / 2 delta^2 + i P0 x / hbar), psi_{-} with
// L0, P0 negated. Components are the products
//     1: psi+ psi+, 2: psi+ psi-, 3: psi- psi+, 4: psi- psi-
// and the state is sum_i s_i |i>. Lengths and P0 are physical.
struct SuperpositionSpec {
    double L0 = 0.0;
    double P0 = 0.0;
    double delta = 1.0;
    std::array<cplx, 4> s{cplx{1.0, 0.0}, {}, {}, {}};
};

// <j|i> for the product components (real, not orthogonal in general).
double component_overlap(const SuperpositionSpec& spec, int i, int j, double hbar = 1.0);
// sum_ij s_i s_j^* <j|i>
double state_norm(const SuperpositionSpec& spec, double hbar = 1.0);
// Rescales s so that state_norm is one. Throws ConfigError for a null state.
SuperpositionSpec normalized(SuperpositionSpec spec, double hbar = 1.0);

// Exponent of the initial-coordinate integral for rho_ij at the final point
// (x1, x2, y1, y2). Everything in reduced units, physical final coordinates
// are converted. The 4^-th root normalizations and Ntilde are not included.
GaussianExponent4 build_component_exponent(const PropagatorData& pd, const SuperpositionSpec& spec,
                                           int i, int j, const Eigen::Vector4d& final_coords);

// rho_ij(t) as an explicit Gaussian in the final coordinates f (reduced units):
//     prefactor exp(f^T R f + S^T f + r)
struct ComponentDensity {
    Matrix4c R = Matrix4c::Zero();
    Vector4c S = Vector4c::Zero();
    cplx r{0.0, 0.0};
    cplx prefactor{0.0, 0.0};

    cplx operator()(const Eigen::Vector4d& f) const;
    // max over real f of |value|; throws NumericalError if unbounded.
    double peak() const;
};

// Reduced density matrix at the horizon for a superposition state.
class ReducedDensity {
public:
    ReducedDensity(const PropagatorData& pd, const SuperpositionSpec& spec);

    // rho(x1, x2; y1, y2) in physical units.
    cplx operator()(double x1, double x2, double y1, double y2) const;
    cplx component(int i, int j, double x1, double x2, double y1, double y2) const;
    // Weighted Wigner function of one component, physical units.
    cplx wigner_component(int i, int j, const Eigen::Vector4d& phase_point) const;
    double wigner(const Eigen::Vector4d& phase_point) const;

    const ComponentDensity& component_density(int i, int j) const;
    const SuperpositionSpec& spec() const noexcept { return spec_; }
    const PropagatorData& data() const noexcept { return pd_; }

private:
    PropagatorData pd_;
    SuperpositionSpec spec_;
    std::array<ComponentDensity, 16> comp_;
};

// Unweighted Wigner function of rho_ij at (X1, X2, P1, P2), physical units.
cplx wigner_of_component(const PropagatorData& pd, const SuperpositionSpec& spec, int i, int j,
                         const Eigen::Vector4d& phase_point);

// Peak |rho_14| relative to sqrt(peak |rho_11| peak |rho_44|).
double cat_coherence(const ReducedDensity& rho);

struct LatticeAxis {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 1;

    double step() const noexcept { return n > 1 ? (hi - lo) / static_cast<double>(n - 1) : 0.0; }
    double at(std::size_t k) const noexcept { return lo + step() * static_cast<double>(k); }
};

struct LatticeSample {
    Eigen::Vector4d point;
    cplx value;
};

std::vector<LatticeSample> sample_density(const ReducedDensity& rho,
                                          const std::array<LatticeAxis, 4>& axes);
std::vector<LatticeSample> sample_wigner(const ReducedDensity& rho,
                                         const std::array<LatticeAxis, 4>& axes);

// rho(x1, x2; x1, x2) on a 2-d lattice, row-major in x1.
std::vector<double> position_density(const ReducedDensity& rho, const LatticeAxis& x1,
                                     const LatticeAxis& x2);
// Lattice sum of the diagonal with cell volume.
double lattice_trace(const ReducedDensity& rho, const LatticeAxis& x1, const LatticeAxis& x2);
// Lattice sum of |rho|^2 over the same axis for all four coordinates.
double lattice_purity(const ReducedDensity& rho, const LatticeAxis& axis);
// rho(x, x; x, x) along the equal-position line, for fringe analysis.
std::vector<double> diagonal_slice(const ReducedDensity& rho, const LatticeAxis& x);
// rho(x, x; -x, -x) along the anti-diagonal line.
std::vector<cplx> antidiagonal_slice(const ReducedDensity& rho, const LatticeAxis& x);

// Headers `x1,x2,y1,y2,re,im` and `X1,X2,P1,P2,re,im`.
void write_density_csv(std::ostream& out, const std::vector<LatticeSample>& samples);
void write_wigner_csv(std::ostream& out, const std::vector<LatticeSample>& samples);

}  // namespace qbm2
