#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace acflow {

/// Periodic rectangular grid on the 4-torus. Index arithmetic is modulo N on
/// every axis; axes listed as thin carry fields that are constant along them
/// and may have fewer points (down to 1).
struct GridSpec {
  static constexpr int dim = 4;

  std::array<int, 4> n{16, 16, 16, 16};
  std::array<double, 4> length{1.0, 1.0, 1.0, 1.0};
  std::array<bool, 4> thin{false, false, false, false};

  /// Throws ConfigError unless every non-thin axis has even N >= 8,
  /// every thin axis has N >= 1, and every length is positive.
  void validate() const;

  double spacing(int axis) const { return length[axis] / n[axis]; }

  /// Smallest spacing over non-thin axes (all axes if all thin).
  double min_spacing() const;

  std::int64_t num_points() const {
    return std::int64_t(n[0]) * n[1] * n[2] * n[3];
  }

  /// Lexicographic linear index: axis 0 slowest, axis 3 fastest.
  std::int64_t index(const std::array<int, 4>& c) const {
    return ((std::int64_t(c[0]) * n[1] + c[1]) * n[2] + c[2]) * n[3] + c[3];
  }

  std::array<int, 4> coords(std::int64_t idx) const {
    std::array<int, 4> c;
    c[3] = int(idx % n[3]); idx /= n[3];
    c[2] = int(idx % n[2]); idx /= n[2];
    c[1] = int(idx % n[1]); idx /= n[1];
    c[0] = int(idx);
    return c;
  }

  std::array<std::int64_t, 4> strides() const {
    return {std::int64_t(n[1]) * n[2] * n[3], std::int64_t(n[2]) * n[3],
            std::int64_t(n[3]), 1};
  }

  /// Coordinate of grid point c along an axis.
  double coord(int axis, int i) const { return length[axis] * i / n[axis]; }

  /// Volume of one grid cell, Pi_a h_a.
  double cell_volume() const {
    return spacing(0) * spacing(1) * spacing(2) * spacing(3);
  }

  bool operator==(const GridSpec&) const = default;
};

/// Wrapped linear-index offsets for the +/-1, +/-2 stencil neighbours of
/// every coordinate along every axis. Built once per grid, shared by all
/// stencil kernels.
class NeighborTable {
 public:
  explicit NeighborTable(const GridSpec& grid);

  /// offset(a, i, s) = linear_index(neighbour at i+s on axis a) - linear_index(i),
  /// s in {-2,-1,+1,+2} mapped to slots {0,1,2,3}.
  std::int64_t offset(int axis, int i, int slot) const {
    return table_[axis][std::size_t(i) * 4 + std::size_t(slot)];
  }

 private:
  std::array<std::vector<std::int64_t>, 4> table_;
};

}  // namespace acflow
