#include "acflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "acflow/errors.hpp"
#include "acflow/reduce.hpp"
#include "acflow/tensor_ops.hpp"

namespace acflow {

std::vector<DissipationSample> dissipation_check(
    std::span<const DiagnosticsRecord> records) {
  if (records.size() < 3) {
    throw CoverageError("dissipation_check needs at least 3 records");
  }
  std::vector<DissipationSample> out;
  out.reserve(records.size() - 2);
  for (std::size_t i = 1; i + 1 < records.size(); ++i) {
    DissipationSample s;
    s.t = records[i].t;
    s.lhs = (records[i + 1].energy - records[i - 1].energy) /
            (records[i + 1].t - records[i - 1].t);
    s.rhs = records[i].dissipation_rhs;
    s.residual = std::abs(s.lhs - s.rhs) / std::max(std::abs(s.rhs), 1e-300);
    out.push_back(s);
  }
  return out;
}

double weight_f(double t, double t0) {
  const double tau = t0 - t;
  if (!(tau > 0.0)) throw ConfigError("weight_f requires t < T0");
  const double l = std::log(tau);
  return -tau * l * l + 2.0 * tau * l - 3.0 * tau;
}

double weight_ftilde(double r) {
  if (!(r > 0.0)) throw ConfigError("weight_ftilde requires R > 0");
  const double l = std::log(r);
  return -4.0 * r * r * l * l + 4.0 * r * r * l - 3.0 * r * r;
}

double cutoff_phi(double rho, double rho_cut) {
  const double half = 0.5 * rho_cut;
  if (rho <= half) return 1.0;
  if (rho >= rho_cut) return 0.0;
  const double s = (rho - half) / half;
  return 1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

namespace {

// |x - x0| in nearest-image coordinates.
double nearest_image_dist_sq(const GridSpec& grid, const std::array<int, 4>& c,
                             const std::array<double, 4>& x0) {
  double d2 = 0.0;
  for (int a = 0; a < 4; ++a) {
    const double L = grid.length[a];
    double d = grid.coord(a, c[a]) - x0[std::size_t(a)];
    d -= L * std::round(d / L);
    d2 += d * d;
  }
  return d2;
}

}  // namespace

double monotonicity_Z(const EndoField& j, const MetricField& metric,
                      const ProbeConfig& probe) {
  const double tau = probe.t0 - j.time;
  if (!(tau > 0.0)) {
    throw ConfigError("monotonicity_Z requires state time below T0");
  }
  const GridSpec& grid = j.grid;
  const GradField dj = covariant_derivative(j, metric);
  const ScalarField gsq = grad_norm_sq(dj, metric);

  const double norm = 1.0 / ((4.0 * std::numbers::pi * tau) *
                             (4.0 * std::numbers::pi * tau));  // n = 4
  const std::int64_t np = grid.num_points();
  std::vector<double> integrand(static_cast<std::size_t>(np));
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    const auto c = grid.coords(p);
    const double d2 = nearest_image_dist_sq(grid, c, probe.x0);
    const double phi = cutoff_phi(std::sqrt(d2), probe.rho_cut);
    integrand[std::size_t(p)] = (phi == 0.0)
                                    ? 0.0
                                    : gsq.v[std::size_t(p)] * norm *
                                          std::exp(-d2 / (4.0 * tau)) * phi *
                                          phi;
  }
  return tau * integrate_scalar(integrand, metric);
}

double monotonicity_Psi(std::span<const double> times,
                        std::span<const double> z_values, double t0,
                        double r) {
  const double lo = t0 - 4.0 * r * r;
  const double hi = t0 - r * r;
  if (times.size() != z_values.size() || times.size() < 2) {
    throw CoverageError("monotonicity_Psi needs matched time/Z samples");
  }
  if (times.front() > lo || times.back() < hi) {
    throw CoverageError("samples do not cover [T0-4R^2, T0-R^2]");
  }

  auto value_at = [&](double t) {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    const std::size_t i = std::size_t(it - times.begin());
    if (i == 0) return z_values[0] / (t0 - times[0]);
    const double t1 = times[i - 1], t2 = times[i];
    const double v1 = z_values[i - 1] / (t0 - t1);
    const double v2 = z_values[i] / (t0 - t2);
    const double w = (t - t1) / (t2 - t1);
    return (1.0 - w) * v1 + w * v2;
  };

  // trapezoid over interior samples plus interpolated endpoints
  std::vector<double> ts;
  std::vector<double> vs;
  ts.push_back(lo);
  vs.push_back(value_at(lo));
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > lo && times[i] < hi) {
      ts.push_back(times[i]);
      vs.push_back(z_values[i] / (t0 - times[i]));
    }
  }
  ts.push_back(hi);
  vs.push_back(value_at(hi));

  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    acc += 0.5 * (vs[i] + vs[i + 1]) * (ts[i + 1] - ts[i]);
  }
  return acc;
}

namespace {

struct Pair {
  double df = 0.0;   // f2 - f1 >= 0
  double gap = 0.0;  // t2 - t1 (or R1 - R2)
  double v1 = 0.0;   // Z(t1) / Psi(R1)
  double v2 = 0.0;   // Z(t2) / Psi(R2)
};

bool pair_holds(const Pair& p, double c, double slack_unit) {
  const double rhs = std::exp(c * p.df) * p.v1 + c * slack_unit * p.gap;
  return p.v2 <= rhs + 1e-14 * (1.0 + std::abs(rhs));
}

double fit_c(std::span<const Pair> pairs, double slack_unit) {
  double c = 0.0;
  for (const Pair& p : pairs) {
    if (pair_holds(p, c, slack_unit)) continue;
    double hi = std::max(1.0, 2.0 * c);
    while (!pair_holds(p, hi, slack_unit) && hi < 1e12) hi *= 2.0;
    double lo = c;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (pair_holds(p, mid, slack_unit)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    c = hi;
  }
  return c;
}

MonotonicityReport run_inequality_check(std::vector<Pair>& pairs,
                                        double slack_unit) {
  std::vector<Pair> train, test;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    (i % 2 == 0 ? train : test).push_back(pairs[i]);
  }
  MonotonicityReport rep;
  rep.train_pairs = int(train.size());
  rep.test_pairs = int(test.size());
  rep.fitted_c = fit_c(train, slack_unit);
  double worst = -std::numeric_limits<double>::infinity();
  for (const Pair& p : test) {
    const double rhs =
        std::exp(rep.fitted_c * p.df) * p.v1 + rep.fitted_c * slack_unit * p.gap;
    const double margin = (p.v2 - rhs) / std::max(1e-300, std::abs(rhs) + p.v2);
    worst = std::max(worst, margin);
    if (!pair_holds(p, rep.fitted_c, slack_unit)) rep.violations += 1;
  }
  rep.worst_margin = test.empty() ? 0.0 : worst;
  return rep;
}

double slack_unit_for(const ProbeConfig& probe, double e0) {
  const double n_half = 2.0;  // n/2 with n = 4
  const double logn = std::log(probe.n_weight);
  return std::pow(probe.n_weight, n_half) * (e0 + std::sqrt(e0)) +
         1.0 / (logn * logn);
}

}  // namespace

MonotonicityReport check_monotonicity_inequality(
    std::span<const double> times, std::span<const double> z_values,
    const ProbeConfig& probe, double e0) {
  if (times.size() != z_values.size()) {
    throw CoverageError("times/Z size mismatch");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] <= times[i - 1]) {
      throw CoverageError("time samples must be strictly increasing");
    }
  }
  const double lo = probe.t0 - std::min(probe.t0, 1.0);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > lo && times[i] < probe.t0) idx.push_back(i);
  }
  if (idx.size() < 10) {
    throw CoverageError("need at least 10 samples inside (T0 - min(T0,1), T0)");
  }
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      Pair p;
      p.v1 = z_values[idx[a]];
      p.v2 = z_values[idx[b]];
      p.df = weight_f(times[idx[b]], probe.t0) - weight_f(times[idx[a]], probe.t0);
      p.gap = times[idx[b]] - times[idx[a]];
      pairs.push_back(p);
    }
  }
  return run_inequality_check(pairs, slack_unit_for(probe, e0));
}

MonotonicityReport check_monotonicity_inequality_psi(
    std::span<const double> r_values, std::span<const double> psi_values,
    const ProbeConfig& probe, double e0) {
  if (r_values.size() != psi_values.size() || r_values.size() < 2) {
    throw CoverageError("need at least two (R, Psi) samples");
  }
  std::vector<std::size_t> order(r_values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return r_values[a] > r_values[b];
  });
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const double r1 = r_values[order[a]];  // larger
      const double r2 = r_values[order[b]];
      Pair p;
      p.v1 = psi_values[order[a]];
      p.v2 = psi_values[order[b]];
      p.df = weight_ftilde(r2) - weight_ftilde(r1);
      p.gap = r1 - r2;
      pairs.push_back(p);
    }
  }
  return run_inequality_check(pairs, slack_unit_for(probe, e0));
}

std::vector<double> shi_ratio(std::span<const EndoField> trajectory,
                              const MetricField& metric, int m) {
  if (m != 2 && m != 3) throw ConfigError("shi_ratio supports m in {2, 3}");
  std::vector<double> out;
  out.reserve(trajectory.size());
  for (const EndoField& j : trajectory) {
    if (!(j.time > 0.0)) {
      out.push_back(0.0);
      continue;
    }
    const double sup = sup_higher_derivative(j, metric, m);
    out.push_back(sup * std::pow(j.time, 0.5 * (m - 1)));
  }
  return out;
}

EpsRegularityReport epsilon_regularity_probe(
    std::span<const EndoField> trajectory, std::span<const double> times,
    std::span<const double> z_values, const MetricField& metric,
    const ProbeConfig& probe, double r, double sigma, double eps0) {
  EpsRegularityReport rep;
  rep.psi = monotonicity_Psi(times, z_values, probe.t0, r);
  if (rep.psi >= eps0) {
    rep.hypothesis_met = false;
    return rep;
  }
  rep.hypothesis_met = true;

  const double rad = sigma * r;
  const double t_lo = probe.t0 - rad * rad;
  const double t_hi = probe.t0 + rad * rad;
  double sup = 0.0;
  bool any = false;
  for (const EndoField& j : trajectory) {
    if (j.time < t_lo - 1e-12 || j.time > t_hi + 1e-12) continue;
    any = true;
    const GradField dj = covariant_derivative(j, metric);
    const ScalarField gsq = grad_norm_sq(dj, metric);
    const GridSpec& grid = j.grid;
    const std::int64_t np = grid.num_points();
    double local = 0.0;
#pragma omp parallel for schedule(static) reduction(max : local)
    for (std::int64_t p = 0; p < np; ++p) {
      const auto c = grid.coords(p);
      if (nearest_image_dist_sq(grid, c, probe.x0) <= rad * rad) {
        local = std::max(local, gsq.v[std::size_t(p)]);
      }
    }
    sup = std::max(sup, local);
  }
  if (!any) {
    throw CoverageError("no trajectory samples inside the parabolic cylinder");
  }
  rep.sup_grad_sq = sup;
  rep.empirical_c = sup * rad * rad;
  return rep;
}

namespace {

// First derivatives of a scalar field along every axis, same stencils.
std::vector<std::array<double, 4>> scalar_gradient(const ScalarField& f) {
  const GridSpec& grid = f.grid;
  const NeighborTable nt(grid);
  std::array<double, 4> c1, c2;
  for (int a = 0; a < 4; ++a) {
    const double h = grid.spacing(a);
    c1[std::size_t(a)] = 8.0 / (12.0 * h);
    c2[std::size_t(a)] = -1.0 / (12.0 * h);
  }
  const double* F = f.v.data();
  const auto& n = grid.n;
  std::vector<std::array<double, 4>> out(f.v.size());
#pragma omp parallel for collapse(2) schedule(static)
  for (int i0 = 0; i0 < n[0]; ++i0) {
    for (int i1 = 0; i1 < n[1]; ++i1) {
      std::int64_t idx = ((std::int64_t(i0) * n[1] + i1) * n[2]) * n[3];
      for (int i2 = 0; i2 < n[2]; ++i2) {
        for (int i3 = 0; i3 < n[3]; ++i3, ++idx) {
          const int c[4] = {i0, i1, i2, i3};
          for (int a = 0; a < 4; ++a) {
            const auto sa = std::size_t(a);
            out[std::size_t(idx)][sa] =
                c1[sa] * (F[idx + nt.offset(a, c[a], 2)] -
                          F[idx + nt.offset(a, c[a], 1)]) +
                c2[sa] * (F[idx + nt.offset(a, c[a], 3)] -
                          F[idx + nt.offset(a, c[a], 0)]);
          }
        }
      }
    }
  }
  return out;
}

// Scalar rough Laplacian g^{pq} (d_p d_q - Gamma^l_{qp} d_l) e as the
// covariant divergence of the materialized gradient.
ScalarField scalar_laplacian(const ScalarField& f, const MetricField& metric) {
  const GridSpec& grid = f.grid;
  const NeighborTable nt(grid);
  std::array<double, 4> c1, c2;
  for (int a = 0; a < 4; ++a) {
    const double h = grid.spacing(a);
    c1[std::size_t(a)] = 8.0 / (12.0 * h);
    c2[std::size_t(a)] = -1.0 / (12.0 * h);
  }
  const auto grad = scalar_gradient(f);
  const auto* G = grad.data();
  const auto& n = grid.n;
  const bool flat = metric.is_flat();
  ScalarField out = ScalarField::zeros(grid);
#pragma omp parallel for collapse(2) schedule(static)
  for (int i0 = 0; i0 < n[0]; ++i0) {
    for (int i1 = 0; i1 < n[1]; ++i1) {
      std::int64_t idx = ((std::int64_t(i0) * n[1] + i1) * n[2]) * n[3];
      for (int i2 = 0; i2 < n[2]; ++i2) {
        for (int i3 = 0; i3 < n[3]; ++i3, ++idx) {
          const int c[4] = {i0, i1, i2, i3};
          double lap = 0.0;
          for (int p = 0; p < 4; ++p) {
            const auto sp = std::size_t(p);
            for (int q = 0; q < 4; ++q) {
              const double w = flat ? (p == q ? 1.0 : 0.0)
                                    : metric.g_inv(idx)(p, q);
              if (w == 0.0) continue;
              double cov =
                  c1[sp] * (G[idx + nt.offset(p, c[p], 2)][std::size_t(q)] -
                            G[idx + nt.offset(p, c[p], 1)][std::size_t(q)]) +
                  c2[sp] * (G[idx + nt.offset(p, c[p], 3)][std::size_t(q)] -
                            G[idx + nt.offset(p, c[p], 0)][std::size_t(q)]);
              if (!flat) {
                const Mat4& ch = metric.chris(idx, p);
                for (int l = 0; l < 4; ++l) {
                  cov -= ch(l, q) * G[idx][std::size_t(l)];
                }
              }
              lap += w * cov;
            }
          }
          out.v[std::size_t(idx)] = lap;
        }
      }
    }
  }
  return out;
}

}  // namespace

double measure_doubling_constant(std::span<const EndoField> trajectory,
                                 const MetricField& metric) {
  if (trajectory.size() < 3) {
    throw CoverageError("measure_doubling_constant needs >= 3 samples");
  }
  double sup = 0.0;
  for (std::size_t s = 1; s + 1 < trajectory.size(); ++s) {
    const ScalarField e_prev = energy_density(trajectory[s - 1], metric);
    const ScalarField e_cur = energy_density(trajectory[s], metric);
    const ScalarField e_next = energy_density(trajectory[s + 1], metric);
    const ScalarField lap = scalar_laplacian(e_cur, metric);
    const double span = trajectory[s + 1].time - trajectory[s - 1].time;
    for (std::size_t p = 0; p < e_cur.v.size(); ++p) {
      const double dt_e = (e_next.v[p] - e_prev.v[p]) / span;
      const double e = e_cur.v[p];
      sup = std::max(sup, (dt_e - lap.v[p]) / (e * e + 1.0));
    }
  }
  return sup;
}

}  // namespace acflow
