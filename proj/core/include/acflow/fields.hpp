#pragma once

#include <vector>

#include "acflow/grid.hpp"
#include "acflow/mat.hpp"

namespace acflow {

/// (1,1)-tensor field: one 4x4 matrix per grid point with entry (b, a)
/// holding J_a^b (row = upper index, column = lower index).
struct EndoField {
  GridSpec grid;
  double time = 0.0;
  std::vector<Mat4> j;

  static EndoField zeros(const GridSpec& g) {
    EndoField f{g, 0.0, {}};
    f.j.assign(std::size_t(g.num_points()), Mat4::Zero());
    return f;
  }
  static EndoField constant(const GridSpec& g, const Mat4& m) {
    EndoField f{g, 0.0, {}};
    f.j.assign(std::size_t(g.num_points()), m);
    return f;
  }
};

/// Covariant derivative of an EndoField: dj[p][k](b, a) = nabla_k J_a^b.
struct GradField {
  GridSpec grid;
  std::vector<std::array<Mat4, 4>> dj;
};

struct ScalarField {
  GridSpec grid;
  std::vector<double> v;

  static ScalarField zeros(const GridSpec& g) {
    return {g, std::vector<double>(std::size_t(g.num_points()), 0.0)};
  }
};

/// Unit 3-vector per grid point (a map into the 2-sphere).
struct SphereField {
  GridSpec grid;
  double time = 0.0;
  std::vector<Vec3> u;

  static SphereField constant(const GridSpec& g, const Vec3& p) {
    SphereField f{g, 0.0, {}};
    f.u.assign(std::size_t(g.num_points()), p);
    return f;
  }
};

}  // namespace acflow
