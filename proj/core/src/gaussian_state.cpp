#include "qbm2/gaussian_state.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "qbm2/errors.hpp"

namespace qbm2 {

Eigen::Matrix4d symplectic_form()
{
    Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
    j(0, 1) = 1.0;
    j(1, 0) = -1.0;
    j(2, 3) = 1.0;
    j(3, 2) = -1.0;
    return j;
}

Eigen::Matrix4d cm_rel_transform()
{
    Eigen::Matrix4d t;
    // clang-format off
    t << 0.5, 0.0,  0.5,  0.0,
         0.0, 1.0,  0.0,  1.0,
         1.0, 0.0, -1.0,  0.0,
         0.0, 0.5,  0.0, -0.5;
    // clang-format on
    return t;
}

namespace {

Eigen::Matrix4d lab_transform()
{
    Eigen::Matrix4d t;
    // clang-format off
    t << 1.0, 0.0,  0.5,  0.0,
         0.0, 0.5,  0.0,  1.0,
         1.0, 0.0, -0.5,  0.0,
         0.0, 0.5,  0.0, -1.0;
    // clang-format on
    return t;
}

GaussianState transformed(const GaussianState& s, const Eigen::Matrix4d& t, Ordering ordering)
{
    GaussianState out;
    out.ordering = ordering;
    out.hbar = s.hbar;
    out.mean = t * s.mean;
    out.cov = t * s.cov * t.transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

}  // namespace

GaussianState to_cm_rel(const GaussianState& s)
{
    if (s.ordering != Ordering::Lab) {
        throw ConfigError("to_cm_rel expects a Lab-ordered state");
    }
    return transformed(s, cm_rel_transform(), Ordering::CmRel);
}

GaussianState to_lab(const GaussianState& s)
{
    if (s.ordering != Ordering::CmRel) {
        throw ConfigError("to_lab expects a CmRel-ordered state");
    }
    return transformed(s, lab_transform(), Ordering::Lab);
}

GaussianState with_ordering(const GaussianState& s, Ordering ordering)
{
    if (s.ordering == ordering) {
        return s;
    }
    return ordering == Ordering::Lab ? to_lab(s) : to_cm_rel(s);
}

double robertson_schrodinger_min(const GaussianState& s)
{
    const Eigen::Matrix4cd m =
        s.cov.cast<std::complex<double>>()
        + std::complex<double>(0.0, 0.5 * s.hbar) * symplectic_form().cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void validate_state(const GaussianState& s, double tol)
{
    if (!s.cov.allFinite() || !s.mean.allFinite()) {
        throw ConfigError("state has non-finite moments");
    }
    if (!(s.hbar > 0.0)) {
        throw ConfigError("hbar must be positive");
    }
    const double scale = std::max(1.0, s.cov.cwiseAbs().maxCoeff());
    if ((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ConfigError("covariance matrix is not symmetric");
    }
    const double rs = robertson_schrodinger_min(s);
    if (rs < -tol) {
        throw ConfigError("covariance violates the uncertainty principle (minimum eigenvalue "
                          + std::to_string(rs) + ")");
    }
}

GaussianState cm_rel_product_state(double a2, double b2, double c2, double d2, double hbar)
{
    GaussianState s;
    s.ordering = Ordering::CmRel;
    s.hbar = hbar;
    s.mean.setZero();
    s.cov = Eigen::Vector4d(a2, b2, c2, d2).asDiagonal();
    return s;
}

}  // namespace qbm2
