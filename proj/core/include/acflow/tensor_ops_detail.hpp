#pragma once

#include "acflow/fields.hpp"
#include "acflow/metric.hpp"

// Internals shared between tensor_ops and the flow stepper: the fused
// Laplacian/nonlinearity pass and the per-evaluation sup statistics it can
// produce at negligible extra cost.

namespace acflow::detail {

struct TensionStats {
  double e_max = 0.0;        // sup of e(J) = |nabla J|^2 / 2
  double tension_sup = 0.0;  // sup of sqrt(<tau, tau>_g)
};

enum class Mode { full, laplacian_only, nonlinear_only };

void tension_pass(const EndoField& j, const GradField& grad,
                  const MetricField& metric, Mode mode, EndoField& out,
                  TensionStats* stats);

/// covariant_derivative writing into a caller-owned buffer (resized as
/// needed) so the stepper can reuse allocations across stages.
void covariant_derivative_into(const EndoField& j, const MetricField& metric,
                               GradField& out);

}  // namespace acflow::detail
