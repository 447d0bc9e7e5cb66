#include "acflow/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "acflow/errors.hpp"
#include "acflow/s2_reduction.hpp"
#include "acflow/tensor_ops.hpp"

namespace acflow {

namespace {

// C-infinity ramp with all derivatives vanishing at both endpoints:
// F(s) = phi(s) / (phi(s) + phi(1-s)) with phi(s) = exp(-w/s).
double flat_ramp(double s, double w) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-w / s);
  const double b = std::exp(-w / (1.0 - s));
  return a / (a + b);
}

// Fixed rotation taking (0,0,-1), the image of both suspension poles, to the
// far value (1,0,0); homotopically trivial on S^2.
Vec3 pole_rotation(const Vec3& v) { return Vec3(-v[2], v[1], v[0]); }

double uniform_pm1(std::mt19937_64& rng) {
  return 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + int(rng() % std::uint64_t(hi - lo + 1));
}

struct TrigMode {
  double c = 0.0;
  std::array<int, 4> k{};
  std::array<int, 4> type{};  // 0 = const, 1 = sin, 2 = cos
};

std::vector<TrigMode> draw_trig_modes(std::mt19937_64& rng,
                                      const GridSpec& grid, int count,
                                      int max_abs_mode) {
  std::vector<TrigMode> modes(static_cast<std::size_t>(count));
  for (auto& m : modes) {
    m.c = uniform_pm1(rng) / count;
    bool nonzero = false;
    for (int a = 0; a < 4; ++a) {
      const int ka =
          grid.thin[a] ? 0 : uniform_int(rng, -max_abs_mode, max_abs_mode);
      m.k[a] = ka;
      m.type[a] = (ka != 0) ? uniform_int(rng, 1, 2) : 0;
      nonzero = nonzero || ka != 0;
    }
    if (!nonzero) {
      for (int a = 0; a < 4; ++a) {
        if (!grid.thin[a]) {
          m.k[a] = 1;
          m.type[a] = 1;
          break;
        }
      }
    }
  }
  return modes;
}

double eval_trig_modes(const std::vector<TrigMode>& modes,
                       const GridSpec& grid, const std::array<double, 4>& x) {
  double s = 0.0;
  for (const auto& m : modes) {
    double prod = m.c;
    for (int a = 0; a < 4; ++a) {
      if (m.type[a] == 0) continue;
      const double th =
          2.0 * std::numbers::pi * m.k[a] * x[std::size_t(a)] / grid.length[a];
      prod *= (m.type[a] == 1) ? std::sin(th) : std::cos(th);
    }
    s += prod;
  }
  return s;
}

}  // namespace

void BubbleSpec::validate(const GridSpec& grid) const {
  const double min_len =
      *std::min_element(grid.length.begin(), grid.length.end());
  if (!(r0 > 0.0) || 2.0 * r0 >= min_len) {
    throw ConfigError("initial.bubble.r0 must satisfy 2 r0 < min length");
  }
  if (!(r > 0.0) || r > r0) {
    throw ConfigError("initial.bubble.r must satisfy 0 < r <= r0");
  }
  const double floor = 3.0 * grid.min_spacing();
  if (r < floor) {
    throw ConfigError("initial.bubble.r below the resolvability floor 3h = " +
                      std::to_string(floor));
  }
  if (!(smoothing_width > 0.0) || smoothing_width > 1.0) {
    throw ConfigError("initial.bubble.smoothing_width must lie in (0, 1]");
  }
}

EndoField kahler_standard(const GridSpec& grid) {
  grid.validate();
  Mat4 j0 = Mat4::Zero();
  j0(1, 0) = 1.0;
  j0(0, 1) = -1.0;
  j0(3, 2) = 1.0;
  j0(2, 3) = -1.0;
  return EndoField::constant(grid, j0);
}

Vec3 hopf(std::complex<double> z1, std::complex<double> z2) {
  const double nrm = std::norm(z1) + std::norm(z2);
  if (std::abs(nrm - 1.0) > 1e-10) {
    throw ConfigError("hopf: input off the unit sphere by " +
                      std::to_string(std::abs(nrm - 1.0)));
  }
  const std::complex<double> w = z1 * std::conj(z2);
  return Vec3(2.0 * w.real(), 2.0 * w.imag(), std::norm(z1) - std::norm(z2));
}

Vec3 bubble_far_value() { return Vec3(1.0, 0.0, 0.0); }

Vec3 pi4_generator(const std::array<double, 5>& x, double smoothing_width) {
  double nrm = 0.0;
  for (double v : x) nrm += v * v;
  if (std::abs(nrm - 1.0) > 1e-10) {
    throw ConfigError("pi4_generator: input off the unit sphere");
  }
  const double wnorm =
      std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
  const double theta = std::atan2(wnorm, x[4]);  // 0 at north, pi at south
  const double beta =
      std::numbers::pi * flat_ramp(theta / std::numbers::pi, smoothing_width);

  Vec3 eq(0.0, 0.0, 1.0);
  if (wnorm > 1e-14) {
    eq = hopf({x[0] / wnorm, x[1] / wnorm}, {x[2] / wnorm, x[3] / wnorm});
  }
  const double sb = std::sin(beta);
  const double cb = std::cos(beta);
  // suspension point on S^3, then the Hopf map again
  const Vec3 out =
      hopf({sb * eq[0], sb * eq[1]}, {sb * eq[2], cb});
  return pole_rotation(out);
}

namespace {

SphereField evaluate_bubble(const GridSpec& grid, const BubbleSpec& spec,
                            double radius) {
  const Vec3 far = bubble_far_value();
  SphereField out = SphereField::constant(grid, far);
  const std::int64_t np = grid.num_points();

#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    const auto c = grid.coords(p);
    std::array<double, 4> dx;
    double rho_sq = 0.0;
    for (int a = 0; a < 4; ++a) {
      const double L = grid.length[a];
      double d = grid.coord(a, c[a]) - spec.center[std::size_t(a)];
      d -= L * std::round(d / L);  // nearest image
      dx[std::size_t(a)] = d;
      rho_sq += d * d;
    }
    const double dist = std::sqrt(rho_sq);
    if (dist >= radius) continue;  // exact far value

    const double rho = dist / radius;
    const double lat =
        std::numbers::pi * flat_ramp(rho, spec.smoothing_width);
    std::array<double, 4> nu{1.0, 0.0, 0.0, 0.0};
    if (dist > 1e-14) {
      for (int a = 0; a < 4; ++a) nu[std::size_t(a)] = dx[std::size_t(a)] / dist;
    }
    const double sl = std::sin(lat);
    const std::array<double, 5> s4{sl * nu[0], sl * nu[1], sl * nu[2],
                                   sl * nu[3], std::cos(lat)};
    Vec3 u = pi4_generator(s4, spec.smoothing_width);
    out.u[std::size_t(p)] = u / u.norm();
  }
  return out;
}

}  // namespace

SphereField bubble_map(const GridSpec& grid, const BubbleSpec& spec) {
  grid.validate();
  BubbleSpec at_r0 = spec;
  at_r0.r = spec.r0;
  at_r0.validate(grid);
  return evaluate_bubble(grid, spec, spec.r0);
}

SphereField rescale_bubble(const GridSpec& grid, const BubbleSpec& spec) {
  grid.validate();
  spec.validate(grid);
  return evaluate_bubble(grid, spec, spec.r);
}

EndoField random_perturbation(const EndoField& base, double amplitude,
                              std::uint64_t seed, const MetricField& metric,
                              int max_abs_mode) {
  if (amplitude < 0.0 || amplitude >= 0.3) {
    throw ConfigError("initial.perturbation.amplitude must lie in [0, 0.3)");
  }
  if (amplitude == 0.0) return base;
  const GridSpec& grid = base.grid;
  const std::int64_t np = grid.num_points();
  std::mt19937_64 rng(seed);

  if (metric.is_flat()) {
    SphereField u = u_from_j(base);
    std::array<std::vector<TrigMode>, 3> modes;
    for (auto& m : modes) m = draw_trig_modes(rng, grid, 4, max_abs_mode);

#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < np; ++p) {
      const auto c = grid.coords(p);
      const std::array<double, 4> x = {grid.coord(0, c[0]), grid.coord(1, c[1]),
                                       grid.coord(2, c[2]),
                                       grid.coord(3, c[3])};
      Vec3 v(eval_trig_modes(modes[0], grid, x),
             eval_trig_modes(modes[1], grid, x),
             eval_trig_modes(modes[2], grid, x));
      Vec3& uu = u.u[std::size_t(p)];
      v -= v.dot(uu) * uu;
      uu = (uu + amplitude * v).normalized();
    }
    EndoField out = j_from_u(u);
    out.time = base.time;
    return out;
  }

  // general metric: perturb the endomorphism entries, then retract
  std::array<std::vector<TrigMode>, 16> modes;
  for (auto& m : modes) m = draw_trig_modes(rng, grid, 2, max_abs_mode);
  EndoField raw = base;
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    const auto c = grid.coords(p);
    const std::array<double, 4> x = {grid.coord(0, c[0]), grid.coord(1, c[1]),
                                     grid.coord(2, c[2]), grid.coord(3, c[3])};
    Mat4& J = raw.j[std::size_t(p)];
    for (int r = 0; r < 4; ++r) {
      for (int col = 0; col < 4; ++col) {
        J(r, col) += amplitude *
                     eval_trig_modes(modes[std::size_t(4 * r + col)], grid, x);
      }
    }
  }
  return project_compatible(raw, metric);
}

}  // namespace acflow
