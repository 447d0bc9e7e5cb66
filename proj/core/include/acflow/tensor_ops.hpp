#pragma once

#include "acflow/fields.hpp"
#include "acflow/metric.hpp"

namespace acflow {

/// "Compatible" flag tolerance at N = 16; scales with h^4.
inline constexpr double kTolCompat = 1e-8;
/// Identity-check tolerance at N = 16; scales with h^4.
inline constexpr double kTolId = 1e-6;

inline double tol_scale_h4(const GridSpec& grid) {
  const double h = grid.min_spacing();
  const double h16 = 1.0 / 16.0;
  return (h / h16) * (h / h16) * (h / h16) * (h / h16);
}

/// nabla_k J_a^b = d_k J_a^b + Gamma^b_{lk} J_a^l - Gamma^l_{ak} J_l^b,
/// partial derivatives by 4th-order centered periodic differences.
GradField covariant_derivative(const EndoField& j, const MetricField& metric);

/// Rough Laplacian g^{pq} nabla_p nabla_q J, evaluated as the covariant
/// divergence of the first derivative so discrete integration by parts holds
/// to stencil accuracy.
EndoField rough_laplacian(const EndoField& j, const MetricField& metric);

/// (J nabla_p J nabla_p J)^k_j = g^{pq} J_j^a nabla_p J_a^b nabla_q J_b^k.
EndoField nonlinear_term(const EndoField& j, const MetricField& metric);

/// rough_laplacian - nonlinear_term; vanishes exactly at harmonic J.
EndoField tension(const EndoField& j, const MetricField& metric);

/// E(J) = integral of |nabla J|^2 dv with the full metric contraction
/// |nabla J|^2 = g_{i1 i2} g^{j1 j2} g^{k1 k2} nabla_{k1} J^{i1}_{j1}
/// nabla_{k2} J^{i2}_{j2}. No factor 1/2.
double energy(const EndoField& j, const MetricField& metric);

/// Pointwise e(J) = |nabla J|^2 / 2.
ScalarField energy_density(const EndoField& j, const MetricField& metric);

/// Pointwise |nabla J|^2 from an already-computed gradient.
ScalarField grad_norm_sq(const GradField& dj, const MetricField& metric);

struct ConstraintResiduals {
  double a_max = 0.0;  ///< sup |g(J,J) - g|
  double b_max = 0.0;  ///< sup |J^2 + id|
  double a_l2 = 0.0;   ///< L2 norm of A over the torus
  double b_l2 = 0.0;   ///< L2 norm of B over the torus
};

ConstraintResiduals constraint_residuals(const EndoField& j,
                                         const MetricField& metric);

bool is_compatible(const EndoField& j, const MetricField& metric,
                   double tol = kTolCompat);

/// Retraction onto the compatible constraint set: per point, in a
/// g-orthonormal frame, antisymmetrize the frame matrix and take its
/// orthogonal polar factor. Throws NonFiniteError if the antisymmetric part
/// is singular at some point (reports the point).
EndoField project_compatible(const EndoField& jraw, const MetricField& metric);

/// [nabla_i, nabla_j] J^b_a = R_ij^b_l J^l_a - R_ij^l_a J^b_l per point,
/// evaluated from the stored curvature. Entry (i, j) is antisymmetric
/// exactly; identically zero on a flat metric.
struct CommutatorField {
  GridSpec grid;
  // six independent pairs (i<j) in the order 01,02,03,12,13,23
  std::vector<std::array<Mat4, 6>> comm;

  Mat4 at(std::int64_t p, int i, int j) const;
};

CommutatorField commutator_curvature_term(const EndoField& j,
                                          const MetricField& metric);

/// Pointwise endomorphism inner product <S,T>_g = g_{b1 b2} g^{a1 a2}
/// S^{b1}_{a1} T^{b2}_{a2}; the plain Frobenius product when g is flat.
double inner_g(const Mat4& s, const Mat4& t, const Mat4& g, const Mat4& ginv);

/// integral of <S,T>_g dv.
double l2_inner(const EndoField& s, const EndoField& t,
                const MetricField& metric);

/// sup over the grid of sqrt(<S,S>_g).
double sup_norm_g(const EndoField& s, const MetricField& metric);

/// max_i sup_x |<nabla_i J, S>_g|(x); used by the orthogonality checks.
double sup_grad_pairing(const GradField& dj, const EndoField& s,
                        const MetricField& metric);

/// sup over the grid of |nabla^m J| for m = 2 or 3, built by repeated
/// covariant differentiation with the same stencils.
double sup_higher_derivative(const EndoField& j, const MetricField& metric,
                             int m);

}  // namespace acflow
