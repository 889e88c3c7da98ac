#include "qbm2/propagator.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "qbm2/csv.hpp"
#include "qbm2/errors.hpp"

namespace qbm2 {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};

using Matrix8c = Eigen::Matrix<cplx, 8, 8>;
using Vector8c = Eigen::Matrix<cplx, 8, 1>;
using Vector8d = Eigen::Matrix<double, 8, 1>;

void check_index(int i, const char* what)
{
    if (i < 1 || i > 4) {
        throw RangeError(std::string(what) + " component index must be in 1..4");
    }
}

// Signs of the displacement of each particle in component i.
std::array<int, 2> component_signs(int i)
{
    static constexpr std::array<std::array<int, 2>, 4> kSigns{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
    return kSigns[static_cast<std::size_t>(i - 1)];
}

template <typename Derived>
cplx sqrt_det_impl(const Eigen::MatrixBase<Derived>& G)
{
    using Real = Eigen::MatrixXd;
    const Real A = G.real();
    const Real B = G.imag();
    const Eigen::LLT<Real> llt(A);
    if (llt.info() != Eigen::Success) {
        throw DomainError("Gaussian exponent is not integrable: real part not positive definite");
    }
    const Real L = llt.matrixL();
    const Real LinvB = L.triangularView<Eigen::Lower>().solve(B);
    const Real C = L.triangularView<Eigen::Lower>().solve(LinvB.transpose());
    const Eigen::SelfAdjointEigenSolver<Real> es(0.5 * (C + C.transpose()));
    cplx result = 1.0;
    for (Eigen::Index k = 0; k < L.rows(); ++k) {
        result *= L(k, k) * std::sqrt(cplx{1.0, es.eigenvalues()(k)});
    }
    return result;
}

// Reduced-unit quantities of the initial state.
struct ReducedSpec {
    double L0, P0, delta;
};

ReducedSpec reduce(const PropagatorData& pd, const SuperpositionSpec& spec)
{
    if (!(spec.delta > 0.0)) {
        throw ConfigError("superposition width delta must be positive");
    }
    const double l = pd.length_unit;
    return {spec.L0 / l, spec.P0 * l / pd.hbar, spec.delta / l};
}

// exp(z^T Q z + L^T z + k) over z = (x10, x20, y10, y20, x1, x2, y1, y2).
struct QuadraticForm8 {
    Matrix8c Q = Matrix8c::Zero();
    Vector8c L = Vector8c::Zero();
    cplx k{0.0, 0.0};

    void add_product(cplx alpha, const Vector8d& l1, const Vector8d& l2)
    {
        const Eigen::Matrix<double, 8, 8> sym = l1 * l2.transpose() + l2 * l1.transpose();
        Q += (0.5 * alpha) * sym.cast<cplx>();
    }
};

Vector8d unit(int k)
{
    Vector8d e = Vector8d::Zero();
    e(k) = 1.0;
    return e;
}

QuadraticForm8 component_form(const PropagatorData& pd, const ReducedSpec& rs, int i, int j)
{
    check_index(i, "ket");
    check_index(j, "bra");
    QuadraticForm8 q;

    const Vector8d xp0 = unit(0) + unit(1), xm0 = unit(0) - unit(1);
    const Vector8d yp0 = unit(2) + unit(3), ym0 = unit(2) - unit(3);
    const Vector8d xpt = unit(4) + unit(5), xmt = unit(4) - unit(5);
    const Vector8d ypt = unit(6) + unit(7), ymt = unit(6) - unit(7);

    const cplx half_i = 0.5 * kI;
    const auto block = [&](double b_tt, double b_0t, double b_t0, double b_00, const Vector8d& xt,
                           const Vector8d& yt, const Vector8d& x0, const Vector8d& y0) {
        q.add_product(half_i * b_tt, xt + yt, xt - yt);
        q.add_product(half_i * b_0t, x0 + y0, xt - yt);
        q.add_product(-half_i * b_t0, xt + yt, x0 - y0);
        q.add_product(-half_i * b_00, x0 + y0, x0 - y0);
    };
    block(pd.bi(1), pd.bi(2), pd.bi(3), pd.bi(4), xpt, ypt, xp0, yp0);
    block(pd.bi(5), pd.bi(6), pd.bi(7), pd.bi(8), xmt, ymt, xm0, ym0);

    q.add_product(-pd.a11, xpt - ypt, xpt - ypt);
    q.add_product(-pd.a22, xp0 - yp0, xp0 - yp0);
    q.add_product(-pd.a12, xp0 - yp0, xpt - ypt);

    const auto ket = component_signs(i);
    const auto bra = component_signs(j);
    const double inv_d2 = 1.0 / (rs.delta * rs.delta);
    for (int slot = 0; slot < 4; ++slot) {
        const bool is_ket = slot < 2;
        const int sigma = is_ket ? ket[static_cast<std::size_t>(slot)]
                                 : bra[static_cast<std::size_t>(slot - 2)];
        const double phase_sign = is_ket ? sigma : -sigma;
        q.Q(slot, slot) -= 0.5 * inv_d2;
        q.L(slot) += sigma * rs.L0 * inv_d2 + kI * (phase_sign * rs.P0);
        q.k -= 0.5 * rs.L0 * rs.L0 * inv_d2;
    }
    return q;
}

cplx bilinear(const Vector4c& a, const Vector4c& b)
{
    return (a.transpose() * b)(0, 0);
}

double single_overlap(int sa, int sb, double L, double P, double delta)
{
    if (sa == sb) {
        return 1.0;
    }
    return std::exp(-L * L / (delta * delta) - P * P * delta * delta);
}

}  // namespace

double PropagatorData::normalization() const
{
    return std::abs(bi(3) * bi(7)) / (kPi * kPi);
}

PropagatorData build_propagator(const ElementaryFunctions& ef, const KernelTable& kt)
{
    if (std::abs(ef.dt - kt.dt()) > 1e-12 * kt.dt()) {
        throw ConfigError("elementary functions and kernel table use different steps");
    }
    const std::size_t n = ef.size();
    if (n < 2 || n > kt.size()) {
        throw ConfigError("kernel table does not cover the propagator horizon");
    }
    PropagatorData pd;
    pd.horizon = ef.horizon;
    const std::size_t last = n - 1;
    pd.b = {0.5 * ef.du2[last], 0.5 * ef.du1[last], 0.5 * ef.du2[0], 0.5 * ef.du1[0],
            0.5 * ef.dw2[last], 0.5 * ef.dw1[last], 0.5 * ef.dw2[0], 0.5 * ef.dw1[0]};
    for (const double v : pd.b) {
        if (!std::isfinite(v)) {
            throw DegenerateHorizonError("propagator endpoint slope is not finite", ef.horizon);
        }
    }

    // Trapezoid double sums of u_i nu u_j, with nu in reduced units.
    const double dt = ef.dt;
    std::vector<double> w1(n), w2(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double wt = (k == 0 || k == last) ? 0.5 * dt : dt;
        w1[k] = wt * ef.u1[k];
        w2[k] = wt * ef.u2[k];
    }
    const auto& nu = kt.nu();
    double s11 = 0.0, s22 = 0.0, s12 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double c1 = 0.0, c2 = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const double v = nu[k > l ? k - l : l - k];
            c1 += v * w1[l];
            c2 += v * w2[l];
        }
        s11 += w1[k] * c1;
        s22 += w2[k] * c2;
        s12 += w1[k] * c2;
    }
    const double nu_scale = 1.0 / (2.0 * kPi * ef.mass);
    pd.a11 = 0.5 * nu_scale * s11;
    pd.a22 = 0.5 * nu_scale * s22;
    pd.a12 = nu_scale * s12;
    pd.hbar = kt.constants().hbar;
    pd.length_unit = std::sqrt(pd.hbar / ef.mass);
    return pd;
}

cplx sqrt_det(const Matrix4c& G)
{
    return sqrt_det_impl(G);
}

cplx gaussian_integrate_4(const GaussianExponent4& e)
{
    const cplx root = sqrt_det(e.G);
    const Vector4c y = e.G.partialPivLu().solve(e.F);
    return kPi * kPi / root * std::exp(e.c + 0.25 * bilinear(e.F, y));
}

double component_overlap(const SuperpositionSpec& spec, int i, int j, double hbar)
{
    check_index(i, "ket");
    check_index(j, "bra");
    const auto a = component_signs(i);
    const auto b = component_signs(j);
    const double P = spec.P0 / hbar;
    return single_overlap(a[0], b[0], spec.L0, P, spec.delta)
           * single_overlap(a[1], b[1], spec.L0, P, spec.delta);
}

double state_norm(const SuperpositionSpec& spec, double hbar)
{
    double total = 0.0;
    for (int i = 1; i <= 4; ++i) {
        for (int j = 1; j <= 4; ++j) {
            const cplx w = spec.s[static_cast<std::size_t>(i - 1)]
                           * std::conj(spec.s[static_cast<std::size_t>(j - 1)]);
            total += w.real() * component_overlap(spec, i, j, hbar);
        }
    }
    return total;
}

SuperpositionSpec normalized(SuperpositionSpec spec, double hbar)
{
    const double norm = state_norm(spec, hbar);
    if (!(norm > 1e-300)) {
        throw ConfigError("superposition amplitudes describe a null state");
    }
    for (auto& s : spec.s) {
        s /= std::sqrt(norm);
    }
    return spec;
}

GaussianExponent4 build_component_exponent(const PropagatorData& pd, const SuperpositionSpec& spec,
                                           int i, int j, const Eigen::Vector4d& final_coords)
{
    const auto q = component_form(pd, reduce(pd, spec), i, j);
    const Vector4c f = (final_coords / pd.length_unit).cast<cplx>();
    GaussianExponent4 e;
    e.G = -q.Q.topLeftCorner<4, 4>();
    e.F = 2.0 * q.Q.topRightCorner<4, 4>() * f + q.L.head<4>();
    e.c = bilinear(f, q.Q.bottomRightCorner<4, 4>() * f) + bilinear(q.L.tail<4>(), f) + q.k;
    return e;
}

namespace {

ComponentDensity make_component(const PropagatorData& pd, const ReducedSpec& rs, int i, int j)
{
    const auto q = component_form(pd, rs, i, j);
    const Matrix4c G = -q.Q.topLeftCorner<4, 4>();
    const Matrix4c Qvf = q.Q.topRightCorner<4, 4>();
    const Vector4c Lv = q.L.head<4>();
    const auto lu = G.partialPivLu();
    const Matrix4c GinvQ = lu.solve(Qvf);
    const Vector4c GinvL = lu.solve(Lv);

    ComponentDensity cd;
    cd.R = q.Q.bottomRightCorner<4, 4>() + Qvf.transpose() * GinvQ;
    cd.R = 0.5 * (cd.R + cd.R.transpose()).eval();
    cd.S = q.L.tail<4>() + Qvf.transpose() * GinvL;
    cd.r = q.k + 0.25 * bilinear(Lv, GinvL);
    const double n4 = 1.0 / (kPi * rs.delta * rs.delta);
    cd.prefactor = pd.normalization() * n4 * kPi * kPi / sqrt_det(G);
    return cd;
}

// x = X - z/2, y = X + z/2 for q = (X1, X2, z1, z2).
Eigen::Matrix4d wigner_map()
{
    Eigen::Matrix4d T;
    T << 1, 0, -0.5, 0,
         0, 1, 0, -0.5,
         1, 0, 0.5, 0,
         0, 1, 0, 0.5;
    return T;
}

// Fourier transform over z of one component, reduced units.
cplx wigner_reduced(const ComponentDensity& cd, const Eigen::Vector2d& X, const Eigen::Vector2d& P)
{
    const Matrix4c T = wigner_map().cast<cplx>();
    const Matrix4c M = T.transpose() * cd.R * T;
    const Vector4c Sq = T.transpose() * cd.S;
    const Eigen::Matrix2cd A = -M.bottomRightCorner<2, 2>();
    const Eigen::Vector2cd Xc = X.cast<cplx>();
    const Eigen::Vector2cd b =
        2.0 * M.bottomLeftCorner<2, 2>() * Xc + Sq.tail<2>() + kI * P.cast<cplx>();
    const cplx xx = (Xc.transpose() * M.topLeftCorner<2, 2>() * Xc)(0, 0);
    const cplx lin = (Sq.head<2>().transpose() * Xc)(0, 0);
    const cplx quad = (b.transpose() * A.partialPivLu().solve(b))(0, 0);
    const cplx gauss = kPi / sqrt_det_impl(A) * std::exp(xx + lin + cd.r + 0.25 * quad);
    return cd.prefactor * gauss / (4.0 * kPi * kPi);
}

}  // namespace

cplx ComponentDensity::operator()(const Eigen::Vector4d& f) const
{
    const Vector4c fc = f.cast<cplx>();
    return prefactor * std::exp(bilinear(fc, R * fc) + bilinear(S, fc) + r);
}

double ComponentDensity::peak() const
{
    const Eigen::Matrix4d A = R.real();
    const Eigen::Vector4d b = S.real();
    const Eigen::LLT<Eigen::Matrix4d> llt(-A);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("component density does not decay in every direction");
    }
    // max of f^T A f + b^T f is b^T (-A)^{-1} b / 4
    const double top = 0.25 * b.dot(llt.solve(b)) + r.real();
    return std::abs(prefactor) * std::exp(top);
}

ReducedDensity::ReducedDensity(const PropagatorData& pd, const SuperpositionSpec& spec)
    : pd_(pd), spec_(spec)
{
    const auto rs = reduce(pd, spec);
    for (int i = 1; i <= 4; ++i) {
        for (int j = 1; j <= 4; ++j) {
            comp_[static_cast<std::size_t>(4 * (i - 1) + (j - 1))] = make_component(pd, rs, i, j);
        }
    }
}

const ComponentDensity& ReducedDensity::component_density(int i, int j) const
{
    check_index(i, "ket");
    check_index(j, "bra");
    return comp_[static_cast<std::size_t>(4 * (i - 1) + (j - 1))];
}

cplx ReducedDensity::component(int i, int j, double x1, double x2, double y1, double y2) const
{
    const double l = pd_.length_unit;
    const Eigen::Vector4d f(x1 / l, x2 / l, y1 / l, y2 / l);
    return component_density(i, j)(f) / (l * l);
}

cplx ReducedDensity::operator()(double x1, double x2, double y1, double y2) const
{
    const double l = pd_.length_unit;
    const Eigen::Vector4d f(x1 / l, x2 / l, y1 / l, y2 / l);
    cplx total = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const cplx w = spec_.s[static_cast<std::size_t>(i)]
                           * std::conj(spec_.s[static_cast<std::size_t>(j)]);
            if (w != cplx{0.0, 0.0}) {
                total += w * comp_[static_cast<std::size_t>(4 * i + j)](f);
            }
        }
    }
    return total / (l * l);
}

cplx ReducedDensity::wigner_component(int i, int j, const Eigen::Vector4d& phase_point) const
{
    const double l = pd_.length_unit;
    const double h = pd_.hbar;
    const Eigen::Vector2d X = phase_point.head<2>() / l;
    const Eigen::Vector2d P = phase_point.tail<2>() * (l / h);
    return wigner_reduced(component_density(i, j), X, P) / (h * h);
}

double ReducedDensity::wigner(const Eigen::Vector4d& phase_point) const
{
    cplx total = 0.0;
    for (int i = 1; i <= 4; ++i) {
        for (int j = 1; j <= 4; ++j) {
            const cplx w = spec_.s[static_cast<std::size_t>(i - 1)]
                           * std::conj(spec_.s[static_cast<std::size_t>(j - 1)]);
            if (w != cplx{0.0, 0.0}) {
                total += w * wigner_component(i, j, phase_point);
            }
        }
    }
    return total.real();
}

cplx wigner_of_component(const PropagatorData& pd, const SuperpositionSpec& spec, int i, int j,
                         const Eigen::Vector4d& phase_point)
{
    check_index(i, "ket");
    check_index(j, "bra");
    const auto cd = make_component(pd, reduce(pd, spec), i, j);
    const double l = pd.length_unit;
    const double h = pd.hbar;
    return wigner_reduced(cd, phase_point.head<2>() / l, phase_point.tail<2>() * (l / h)) / (h * h);
}

double cat_coherence(const ReducedDensity& rho)
{
    const double p11 = rho.component_density(1, 1).peak();
    const double p44 = rho.component_density(4, 4).peak();
    return rho.component_density(1, 4).peak() / std::sqrt(p11 * p44);
}

namespace {

template <typename Fn>
std::vector<LatticeSample> sample_lattice(const std::array<LatticeAxis, 4>& axes, Fn&& fn)
{
    for (const auto& a : axes) {
        if (a.n == 0) {
            throw ConfigError("lattice axis needs at least one point");
        }
    }
    std::vector<LatticeSample> out;
    out.reserve(axes[0].n * axes[1].n * axes[2].n * axes[3].n);
    for (std::size_t a = 0; a < axes[0].n; ++a) {
        for (std::size_t b = 0; b < axes[1].n; ++b) {
            for (std::size_t c = 0; c < axes[2].n; ++c) {
                for (std::size_t d = 0; d < axes[3].n; ++d) {
                    const Eigen::Vector4d p(axes[0].at(a), axes[1].at(b), axes[2].at(c),
                                            axes[3].at(d));
                    out.push_back({p, fn(p)});
                }
            }
        }
    }
    return out;
}

void write_samples(std::ostream& out, std::vector<std::string> header,
                   const std::vector<LatticeSample>& samples)
{
    CsvWriter w(out, std::move(header));
    for (const auto& s : samples) {
        w.row({s.point(0), s.point(1), s.point(2), s.point(3), s.value.real(), s.value.imag()});
    }
}

}  // namespace

std::vector<LatticeSample> sample_density(const ReducedDensity& rho,
                                          const std::array<LatticeAxis, 4>& axes)
{
    return sample_lattice(axes, [&](const Eigen::Vector4d& p) { return rho(p(0), p(1), p(2), p(3)); });
}

std::vector<LatticeSample> sample_wigner(const ReducedDensity& rho,
                                         const std::array<LatticeAxis, 4>& axes)
{
    return sample_lattice(axes, [&](const Eigen::Vector4d& p) { return cplx{rho.wigner(p), 0.0}; });
}

std::vector<double> position_density(const ReducedDensity& rho, const LatticeAxis& x1,
                                     const LatticeAxis& x2)
{
    std::vector<double> out;
    out.reserve(x1.n * x2.n);
    for (std::size_t a = 0; a < x1.n; ++a) {
        for (std::size_t b = 0; b < x2.n; ++b) {
            const double u = x1.at(a), v = x2.at(b);
            out.push_back(rho(u, v, u, v).real());
        }
    }
    return out;
}

double lattice_trace(const ReducedDensity& rho, const LatticeAxis& x1, const LatticeAxis& x2)
{
    double total = 0.0;
    for (const double v : position_density(rho, x1, x2)) {
        total += v;
    }
    return total * x1.step() * x2.step();
}

double lattice_purity(const ReducedDensity& rho, const LatticeAxis& axis)
{
    double total = 0.0;
    for (std::size_t a = 0; a < axis.n; ++a) {
        double slab = 0.0;
        for (std::size_t b = 0; b < axis.n; ++b) {
            for (std::size_t c = 0; c < axis.n; ++c) {
                for (std::size_t d = 0; d < axis.n; ++d) {
                    slab += std::norm(rho(axis.at(a), axis.at(b), axis.at(c), axis.at(d)));
                }
            }
        }
        total += slab;
    }
    const double h = axis.step();
    return total * h * h * h * h;
}

std::vector<double> diagonal_slice(const ReducedDensity& rho, const LatticeAxis& x)
{
    std::vector<double> out;
    out.reserve(x.n);
    for (std::size_t k = 0; k < x.n; ++k) {
        const double v = x.at(k);
        out.push_back(rho(v, v, v, v).real());
    }
    return out;
}

std::vector<cplx> antidiagonal_slice(const ReducedDensity& rho, const LatticeAxis& x)
{
    std::vector<cplx> out;
    out.reserve(x.n);
    for (std::size_t k = 0; k < x.n; ++k) {
        const double v = x.at(k);
        out.push_back(rho(v, v, -v, -v));
    }
    return out;
}

void write_density_csv(std::ostream& out, const std::vector<LatticeSample>& samples)
{
    write_samples(out, {"x1", "x2", "y1", "y2", "re", "im"}, samples);
}

void write_wigner_csv(std::ostream& out, const std::vector<LatticeSample>& samples)
{
    write_samples(out, {"X1", "X2", "P1", "P2", "re", "im"}, samples);
}

}  // namespace qbm2
