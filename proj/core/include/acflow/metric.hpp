#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "acflow/grid.hpp"
#include "acflow/mat.hpp"

namespace acflow {

enum class MetricTag { flat, perturbed };

/// Riemannian metric sampled on the grid together with everything derived
/// from it: inverse, volume density, Christoffel symbols and the curvature
/// commutator coefficients. Immutable after construction and safe to share
/// read-only across workers.
///
/// The flat metric stores no per-point data; its accessors return constants.
/// For the perturbed metric all derivatives are evaluated analytically from
/// the generating trigonometric series, so gamma and riemann are exact on the
/// grid (no finite differences).
class MetricField {
 public:
  const GridSpec& grid() const { return grid_; }
  MetricTag tag() const { return tag_; }
  bool is_flat() const { return tag_ == MetricTag::flat; }
  double amplitude() const { return amplitude_; }
  std::uint64_t seed() const { return seed_; }

  const Mat4& g(std::int64_t p) const {
    return is_flat() ? identity_ : g_[std::size_t(p)];
  }
  const Mat4& g_inv(std::int64_t p) const {
    return is_flat() ? identity_ : g_inv_[std::size_t(p)];
  }
  double sqrt_det(std::int64_t p) const {
    return is_flat() ? 1.0 : sqrt_det_[std::size_t(p)];
  }

  /// chris(p, k)(b, l) = Gamma^b_{lk} at point p; symmetric in (l, k).
  const Mat4& chris(std::int64_t p, int k) const {
    return is_flat() ? zero_ : chris_[std::size_t(p)][std::size_t(k)];
  }

  /// riem(p, i, j)(b, l) = R_{ij}{}^b{}_l, the coefficient of the commutator
  /// [nabla_i, nabla_j] acting on vectors. Antisymmetric in (i, j) exactly.
  Mat4 riem(std::int64_t p, int i, int j) const;

  /// Largest eigenvalue of g_inv over the grid (1 for flat).
  double max_g_inv_eigenvalue() const { return max_ginv_eig_; }

  /// Smallest eigenvalue of g over the grid (1 for flat).
  double min_g_eigenvalue() const { return min_g_eig_; }

  friend MetricField build_flat_metric(const GridSpec& grid);
  friend MetricField build_perturbed_metric(const GridSpec& grid,
                                            double amplitude,
                                            std::uint64_t seed);

 private:
  MetricField() = default;

  static const Mat4 identity_;
  static const Mat4 zero_;

  GridSpec grid_;
  MetricTag tag_ = MetricTag::flat;
  double amplitude_ = 0.0;
  std::uint64_t seed_ = 0;
  double max_ginv_eig_ = 1.0;
  double min_g_eig_ = 1.0;

  std::vector<Mat4> g_, g_inv_;
  std::vector<double> sqrt_det_;
  std::vector<std::array<Mat4, 4>> chris_;
  // six independent pairs (i<j) in the order 01,02,03,12,13,23
  std::vector<std::array<Mat4, 6>> riem_;
};

MetricField build_flat_metric(const GridSpec& grid);

/// g_ij = delta_ij + amplitude * s_ij with s a fixed sum of at most three
/// low-frequency trigonometric product modes per entry, drawn
/// deterministically from the seed. Throws ConfigError if the result is not
/// safely positive definite (min eigenvalue <= 0.5) or amplitude is out of
/// range.
MetricField build_perturbed_metric(const GridSpec& grid, double amplitude,
                                   std::uint64_t seed);

/// Integral of f over the torus: pairwise-tree sum of f * sqrt|g| * h^4.
double integrate_scalar(std::span<const double> f, const MetricField& metric);

}  // namespace acflow
