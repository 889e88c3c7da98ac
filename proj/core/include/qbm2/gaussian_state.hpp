#pragma once

#include <Eigen/Dense>

namespace qbm2 {

// CmRel: (X, P, x, p) with X = (x1 + x2)/2, P = P1 + P2, x = x1 - x2,
// p = (P1 - P2)/2. Lab: (x1, P1, x2, P2).
enum class Ordering { CmRel, Lab };

struct GaussianState {
    Ordering ordering = Ordering::CmRel;
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
    double hbar = 1.0;
};

// Block-diagonal [[0, 1], [-1, 0]] for two (position, momentum) pairs; the
// same matrix for both orderings.
Eigen::Matrix4d symplectic_form();

// Lab -> CmRel coordinate map.
Eigen::Matrix4d cm_rel_transform();

GaussianState to_cm_rel(const GaussianState& s);
GaussianState to_lab(const GaussianState& s);
GaussianState with_ordering(const GaussianState& s, Ordering ordering);

// Smallest eigenvalue of cov + (i hbar / 2) J.
double robertson_schrodinger_min(const GaussianState& s);

// Throws ConfigError unless cov is finite, symmetric (1e-12 relative) and
// satisfies Robertson-Schroedinger within `tol`.
void validate_state(const GaussianState& s, double tol = 1e-9);

// Product CmRel state with centre-of-mass widths (a^2, b^2) and relative
// widths (c^2, d^2) on the diagonal.
GaussianState cm_rel_product_state(double a2, double b2, double c2, double d2, double hbar = 1.0);

}  // namespace qbm2
