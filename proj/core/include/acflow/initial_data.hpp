#pragma once

#include <array>
#include <complex>
#include <cstdint>

#include "acflow/fields.hpp"
#include "acflow/metric.hpp"

namespace acflow {

/// Bubble construction data. The bubble occupies B_{r}(center); r0 is the
/// reference radius of the unrescaled map, and smoothing_width controls the
/// flat-at-endpoints latitude profiles that keep the composite smooth at the
/// poles and across the bubble boundary.
struct BubbleSpec {
  std::array<double, 4> center{0.5, 0.5, 0.5, 0.5};
  double r0 = 0.25;
  double r = 0.25;
  double smoothing_width = 0.15;

  /// Checks 2 r0 < min L, 0 < r <= r0 and the resolvability floor r >= 3h.
  void validate(const GridSpec& grid) const;
};

/// The constant standard structure e1 -> e2, e2 -> -e1, e3 -> e4, e4 -> -e3.
EndoField kahler_standard(const GridSpec& grid);

/// Hopf map S^3 -> S^2: (z1, z2) -> (2 Re z1 conj(z2), 2 Im z1 conj(z2),
/// |z1|^2 - |z2|^2). Throws ConfigError if |z1|^2 + |z2|^2 deviates from 1
/// by more than 1e-10.
Vec3 hopf(std::complex<double> z1, std::complex<double> z2);

/// Generator of pi_4(S^2) = Z_2: the Hopf map composed with its suspension,
/// with the suspension latitude reparametrized by a smooth flat-at-endpoints
/// profile so the composite is smooth at both poles. Input is a unit vector
/// in R^5.
Vec3 pi4_generator(const std::array<double, 5>& x, double smoothing_width);

/// The reference point both poles collapse to (equals u_from_j of the
/// standard structure).
Vec3 bubble_far_value();

/// S^2-valued bubble at radius spec.r0: the constant far value outside
/// B_{r0}(center), the collapse-to-S^4 composed with pi4_generator inside.
/// Exactly (bitwise) constant outside the ball.
SphereField bubble_map(const GridSpec& grid, const BubbleSpec& spec);

/// The rescaled bubble J_r: same construction evaluated at radius spec.r
/// (direct analytic evaluation of the profile at the dilated argument).
SphereField rescale_bubble(const GridSpec& grid, const BubbleSpec& spec);

/// Compatible random perturbation of a compatible base structure. For the
/// flat metric the sphere map is perturbed by a band-limited tangent field
/// and renormalized, so the result is exactly compatible; for a general
/// metric the endomorphism is perturbed and re-projected.
EndoField random_perturbation(const EndoField& base, double amplitude,
                              std::uint64_t seed, const MetricField& metric,
                              int max_abs_mode = 2);

}  // namespace acflow
