#pragma once

#include <span>

#include "acflow/fields.hpp"
#include "acflow/metric.hpp"

namespace acflow {

/// The three constant compatible structures on flat R^4 given by left
/// quaternion multiplication by i, j, k in the basis (1, i, j, k).
/// They satisfy I_a^2 = -id, I_a I_b + I_b I_a = -2 delta_ab id and
/// I_1 I_2 = I_3 exactly (integer matrices).
struct ReductionBasis {
  static const Mat4 I1;
  static const Mat4 I2;
  static const Mat4 I3;

  static const Mat4& at(int a);  // a in {0,1,2}
};

/// J(x) = u_1 I_1 + u_2 I_2 + u_3 I_3; compatible with the flat metric for
/// unit u by the quaternion identities. Throws ConfigError on non-unit input
/// (tolerance 1e-10).
EndoField j_from_u(const SphereField& u);

/// u_a = -trace(J I_a) / 4, with the reconstruction residual
/// |J - sum u_a I_a|_inf checked against 1e-8. Throws ReconstructionFailure
/// (reporting the worst point) when J is not in the modeled orientation
/// component.
SphereField u_from_j(const EndoField& j);

/// Brute-force measurement of the constant lambda = |nabla J_u|^2 / |nabla u|^2
/// over several smooth unit fields. Asserts relative spread < 1e-6 across all
/// samples and points with |nabla u|^2 > 1e-8; throws ConfigError otherwise.
double reduction_factor_oracle(std::span<const SphereField> samples);

/// One RK4 step of the sigma-model flow du/dt = Lap u + |nabla u|^2 u with
/// the flat iterated-difference Laplacian, followed by pointwise
/// renormalization to the sphere. Throws NonFiniteError on NaN/Inf.
SphereField harmonic_map_flow_step(const SphereField& u, double dt);

double sphere_energy(const SphereField& u);          // integral |nabla u|^2
ScalarField sphere_grad_norm_sq(const SphereField& u);

/// Pointwise sup of |u1 - u2| over the grid.
double sphere_distance(const SphereField& a, const SphereField& b);

struct CrossValidateReport {
  std::vector<double> times;
  std::vector<double> sup_distance;
  double max_distance = 0.0;
  double tol = 0.0;
  bool passed = false;
};

struct StepControl;  // flow.hpp

/// Runs the tensor flow on j0 and the sigma-model flow on u_from_j(j0) with
/// matched dt, comparing u_from_j(J(t)) against u(t) at every sample_every-th
/// step. Flat metric only.
CrossValidateReport cross_validate(const EndoField& j0, double t_end,
                                   const StepControl& ctrl,
                                   const MetricField& metric,
                                   int sample_every = 8,
                                   double tol = 1e-5);

}  // namespace acflow
