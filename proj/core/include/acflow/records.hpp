#pragma once

#include <optional>

namespace acflow {

/// Per-sample scalars emitted along a run. E >= 0 and e_max >= 0; every entry
/// is finite unless the run ended on a non-finite signal.
struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;        ///< E(J) = integral |nabla J|^2
  double e_max = 0.0;         ///< sup e(J) = sup |nabla J|^2 / 2
  double a_max = 0.0;
  double b_max = 0.0;
  double tension_linf = 0.0;
  double dissipation_lhs = 0.0;  ///< centered difference of E(t)
  double dissipation_rhs = 0.0;  ///< -kappa * integral |tension|^2
  double dt = 0.0;
  std::optional<double> z;       ///< weighted local energy, when probed
  std::optional<double> shi_m2;  ///< sup|nabla^2 J| * t^(1/2), when probed
};

}  // namespace acflow
