#pragma once

#include <span>
#include <vector>

#include "acflow/config.hpp"
#include "acflow/fields.hpp"
#include "acflow/metric.hpp"
#include "acflow/records.hpp"

namespace acflow {

/// Dissipation factor: dE/dt = -kappa * integral |tension|^2 for
/// E = integral |nabla J|^2. Confirmed by the one-step oracle in the test
/// suite before anything asserts against it.
inline constexpr double kDissipationKappa = 2.0;

struct DissipationSample {
  double t = 0.0;
  double lhs = 0.0;       ///< centered difference of E
  double rhs = 0.0;       ///< -kappa * integral |tension|^2
  double residual = 0.0;  ///< |lhs - rhs| / max(|rhs|, eps)
};

/// Centered-difference check of the dissipation identity over a record
/// series; requires at least 3 records.
std::vector<DissipationSample> dissipation_check(
    std::span<const DiagnosticsRecord> records);

/// Weight f(t) = -(T0-t) ln^2(T0-t) + 2 (T0-t) ln(T0-t) - 3 (T0-t).
double weight_f(double t, double t0);
/// Weight ftilde(R) = -4 R^2 ln^2 R + 4 R^2 ln R - 3 R^2.
double weight_ftilde(double r);

/// The radial cutoff: 1 on [0, rho_cut/2], quintic transition, 0 from
/// rho_cut on.
double cutoff_phi(double rho, double rho_cut);

/// Z(t) = (T0 - t) * integral of |nabla J|^2 G phi^2 sqrt|g| dx with G the
/// backward Euclidean heat kernel about (x0, T0) in nearest-image
/// coordinates. Throws ConfigError if the state time is not below T0.
double monotonicity_Z(const EndoField& j, const MetricField& metric,
                      const ProbeConfig& probe);

/// Trapezoid of Z(t) / (T0 - t) over [T0 - 4R^2, T0 - R^2], interpolating to
/// the window endpoints. Throws CoverageError when the samples do not span
/// the window.
double monotonicity_Psi(std::span<const double> times,
                        std::span<const double> z_values, double t0, double r);

struct MonotonicityReport {
  double fitted_c = 0.0;
  int train_pairs = 0;
  int test_pairs = 0;
  int violations = 0;
  double worst_margin = 0.0;  ///< most positive violation on the held-out half
};

/// Fits the smallest C >= 0 satisfying
///   Z(t2) <= exp(C (f(t2)-f(t1))) Z(t1)
///           + C (N^{n/2} (E0 + sqrt E0) + 1/ln^2 N) (t2 - t1)
/// on the even-indexed sample pairs and verifies the odd-indexed ones.
/// Only samples with t in (T0 - min(T0,1), T0) participate.
MonotonicityReport check_monotonicity_inequality(
    std::span<const double> times, std::span<const double> z_values,
    const ProbeConfig& probe, double e0);

/// Same inequality in the radius variable with the ftilde weight:
///   Psi(R2) <= exp(C (ftilde(R2)-ftilde(R1))) Psi(R1) + C K (R1 - R2).
MonotonicityReport check_monotonicity_inequality_psi(
    std::span<const double> r_values, std::span<const double> psi_values,
    const ProbeConfig& probe, double e0);

/// sup_x |nabla^m J| * t^{(m-1)/2} for every sampled state; m in {2, 3}.
std::vector<double> shi_ratio(std::span<const EndoField> trajectory,
                              const MetricField& metric, int m);

struct EpsRegularityReport {
  double psi = 0.0;
  bool hypothesis_met = false;
  double empirical_c = 0.0;  ///< sup over the cylinder of |nabla J|^2 (sigma R)^2
  double sup_grad_sq = 0.0;
};

/// Evaluates Psi(R) from the sampled trajectory; when it is below eps0,
/// reports the empirical regularity constant over the parabolic cylinder
/// P_{sigma R}(x0, T0).
EpsRegularityReport epsilon_regularity_probe(
    std::span<const EndoField> trajectory, std::span<const double> times,
    std::span<const double> z_values, const MetricField& metric,
    const ProbeConfig& probe, double r, double sigma, double eps0);

/// sup over a trajectory of (d_t - Lap) e(J) / (e(J)^2 + 1), measured with
/// centered time differences; 1/result calibrates the doubling-time delta.
double measure_doubling_constant(std::span<const EndoField> trajectory,
                                 const MetricField& metric);

}  // namespace acflow
