#include "acflow/s2_reduction.hpp"

#include <cmath>
#include <limits>

#include "acflow/errors.hpp"
#include "acflow/flow.hpp"
#include "acflow/reduce.hpp"
#include "acflow/tensor_ops.hpp"

namespace acflow {

namespace {

Mat4 make_basis(int a) {
  // left multiplication by i, j, k on H = R^4 with basis (1, i, j, k)
  Mat4 m = Mat4::Zero();
  switch (a) {
    case 0:  // i: 1->i, i->-1, j->k, k->-j
      m(1, 0) = 1;  m(0, 1) = -1; m(3, 2) = 1;  m(2, 3) = -1;
      break;
    case 1:  // j: 1->j, i->-k, j->-1, k->i
      m(2, 0) = 1;  m(3, 1) = -1; m(0, 2) = -1; m(1, 3) = 1;
      break;
    default:  // k: 1->k, i->j, j->-i, k->-1
      m(3, 0) = 1;  m(2, 1) = 1;  m(1, 2) = -1; m(0, 3) = -1;
  }
  return m;
}

}  // namespace

const Mat4 ReductionBasis::I1 = make_basis(0);
const Mat4 ReductionBasis::I2 = make_basis(1);
const Mat4 ReductionBasis::I3 = make_basis(2);

const Mat4& ReductionBasis::at(int a) {
  switch (a) {
    case 0: return I1;
    case 1: return I2;
    default: return I3;
  }
}

EndoField j_from_u(const SphereField& u) {
  const std::int64_t np = u.grid.num_points();
  EndoField out;
  out.grid = u.grid;
  out.time = u.time;
  out.j.resize(std::size_t(np));

#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    const Vec3& v = u.u[std::size_t(p)];
    if (std::abs(v.norm() - 1.0) > 1e-10) {
      out.j[std::size_t(p)](0, 0) = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    out.j[std::size_t(p)] = v[0] * ReductionBasis::I1 +
                            v[1] * ReductionBasis::I2 +
                            v[2] * ReductionBasis::I3;
  }
  for (std::int64_t p = 0; p < np; ++p) {
    if (std::isnan(out.j[std::size_t(p)](0, 0))) {
      throw ConfigError("j_from_u: non-unit input at point " +
                        std::to_string(p));
    }
  }
  return out;
}

SphereField u_from_j(const EndoField& j) {
  const std::int64_t np = j.grid.num_points();
  SphereField out;
  out.grid = j.grid;
  out.time = j.time;
  out.u.resize(std::size_t(np));

  double worst = 0.0;
  std::int64_t worst_point = 0;

#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    const Mat4& J = j.j[std::size_t(p)];
    Vec3 v;
    for (int a = 0; a < 3; ++a) {
      v[a] = -0.25 * (J * ReductionBasis::at(a)).trace();
    }
    out.u[std::size_t(p)] = v;
  }
  for (std::int64_t p = 0; p < np; ++p) {
    const Vec3& v = out.u[std::size_t(p)];
    const Mat4 rec = v[0] * ReductionBasis::I1 + v[1] * ReductionBasis::I2 +
                     v[2] * ReductionBasis::I3;
    const double res = (j.j[std::size_t(p)] - rec).cwiseAbs().maxCoeff();
    if (res > worst) {
      worst = res;
      worst_point = p;
    }
  }
  if (worst > 1e-8) {
    throw ReconstructionFailure(worst, worst_point);
  }
  return out;
}

ScalarField sphere_grad_norm_sq(const SphereField& u) {
  const GridSpec& grid = u.grid;
  const NeighborTable nt(grid);
  ScalarField out = ScalarField::zeros(grid);
  const Vec3* U = u.u.data();
  const auto& n = grid.n;

  std::array<double, 4> c1, c2;
  for (int a = 0; a < 4; ++a) {
    const double h = grid.spacing(a);
    c1[std::size_t(a)] = 8.0 / (12.0 * h);
    c2[std::size_t(a)] = -1.0 / (12.0 * h);
  }

#pragma omp parallel for collapse(2) schedule(static)
  for (int i0 = 0; i0 < n[0]; ++i0) {
    for (int i1 = 0; i1 < n[1]; ++i1) {
      std::int64_t idx = ((std::int64_t(i0) * n[1] + i1) * n[2]) * n[3];
      for (int i2 = 0; i2 < n[2]; ++i2) {
        for (int i3 = 0; i3 < n[3]; ++i3, ++idx) {
          const int c[4] = {i0, i1, i2, i3};
          double s = 0.0;
          for (int a = 0; a < 4; ++a) {
            const auto sa = std::size_t(a);
            const Vec3 d = c1[sa] * (U[idx + nt.offset(a, c[a], 2)] -
                                     U[idx + nt.offset(a, c[a], 1)]) +
                           c2[sa] * (U[idx + nt.offset(a, c[a], 3)] -
                                     U[idx + nt.offset(a, c[a], 0)]);
            s += d.squaredNorm();
          }
          out.v[std::size_t(idx)] = s;
        }
      }
    }
  }
  return out;
}

double sphere_energy(const SphereField& u) {
  const MetricField flat = build_flat_metric(u.grid);
  const ScalarField d = sphere_grad_norm_sq(u);
  return integrate_scalar(d.v, flat);
}

namespace {

// du/dt = Lap u + |grad u|^2 u with Lap = sum_a D_a D_a (iterated stencil).
void sigma_rhs(const GridSpec& grid, const NeighborTable& nt,
               const std::vector<Vec3>& u, std::vector<Vec3>& grad_buf,
               std::vector<Vec3>& out) {
  const auto& n = grid.n;
  const Vec3* U = u.data();
  std::array<double, 4> c1, c2;
  for (int a = 0; a < 4; ++a) {
    const double h = grid.spacing(a);
    c1[std::size_t(a)] = 8.0 / (12.0 * h);
    c2[std::size_t(a)] = -1.0 / (12.0 * h);
  }

  // first derivatives, 4 per point, stored interleaved
  grad_buf.resize(u.size() * 4);
  Vec3* G = grad_buf.data();
#pragma omp parallel for collapse(2) schedule(static)
  for (int i0 = 0; i0 < n[0]; ++i0) {
    for (int i1 = 0; i1 < n[1]; ++i1) {
      std::int64_t idx = ((std::int64_t(i0) * n[1] + i1) * n[2]) * n[3];
      for (int i2 = 0; i2 < n[2]; ++i2) {
        for (int i3 = 0; i3 < n[3]; ++i3, ++idx) {
          const int c[4] = {i0, i1, i2, i3};
          for (int a = 0; a < 4; ++a) {
            const auto sa = std::size_t(a);
            G[4 * idx + a] = c1[sa] * (U[idx + nt.offset(a, c[a], 2)] -
                                       U[idx + nt.offset(a, c[a], 1)]) +
                             c2[sa] * (U[idx + nt.offset(a, c[a], 3)] -
                                       U[idx + nt.offset(a, c[a], 0)]);
          }
        }
      }
    }
  }

  out.resize(u.size());
  Vec3* O = out.data();
#pragma omp parallel for collapse(2) schedule(static)
  for (int i0 = 0; i0 < n[0]; ++i0) {
    for (int i1 = 0; i1 < n[1]; ++i1) {
      std::int64_t idx = ((std::int64_t(i0) * n[1] + i1) * n[2]) * n[3];
      for (int i2 = 0; i2 < n[2]; ++i2) {
        for (int i3 = 0; i3 < n[3]; ++i3, ++idx) {
          const int c[4] = {i0, i1, i2, i3};
          Vec3 lap = Vec3::Zero();
          double gsq = 0.0;
          for (int a = 0; a < 4; ++a) {
            const auto sa = std::size_t(a);
            lap += c1[sa] * (G[4 * (idx + nt.offset(a, c[a], 2)) + a] -
                             G[4 * (idx + nt.offset(a, c[a], 1)) + a]) +
                   c2[sa] * (G[4 * (idx + nt.offset(a, c[a], 3)) + a] -
                             G[4 * (idx + nt.offset(a, c[a], 0)) + a]);
            gsq += G[4 * idx + a].squaredNorm();
          }
          O[idx] = lap + gsq * U[idx];
        }
      }
    }
  }
}

}  // namespace

SphereField harmonic_map_flow_step(const SphereField& u, double dt) {
  const GridSpec& grid = u.grid;
  const NeighborTable nt(grid);
  const std::size_t np = u.u.size();

  std::vector<Vec3> grad_buf;
  std::vector<Vec3> k(np), stage(np), acc(np);

  sigma_rhs(grid, nt, u.u, grad_buf, k);  // k1
  for (std::size_t p = 0; p < np; ++p) {
    acc[p] = k[p];
    stage[p] = u.u[p] + 0.5 * dt * k[p];
  }
  sigma_rhs(grid, nt, stage, grad_buf, k);  // k2
  for (std::size_t p = 0; p < np; ++p) {
    acc[p] += 2.0 * k[p];
    stage[p] = u.u[p] + 0.5 * dt * k[p];
  }
  sigma_rhs(grid, nt, stage, grad_buf, k);  // k3
  for (std::size_t p = 0; p < np; ++p) {
    acc[p] += 2.0 * k[p];
    stage[p] = u.u[p] + dt * k[p];
  }
  sigma_rhs(grid, nt, stage, grad_buf, k);  // k4
  SphereField out;
  out.grid = grid;
  out.time = u.time + dt;
  out.u.resize(np);
  bool finite = true;
  for (std::size_t p = 0; p < np; ++p) {
    Vec3 v = u.u[p] + (dt / 6.0) * (acc[p] + k[p]);
    const double norm = v.norm();
    if (!std::isfinite(norm) || norm == 0.0) {
      finite = false;
      break;
    }
    out.u[p] = v / norm;
  }
  if (!finite) {
    throw NonFiniteError("harmonic_map_flow_step produced a non-finite value");
  }
  return out;
}

double sphere_distance(const SphereField& a, const SphereField& b) {
  double m = 0.0;
  for (std::size_t p = 0; p < a.u.size(); ++p) {
    m = std::max(m, (a.u[p] - b.u[p]).norm());
  }
  return m;
}

double reduction_factor_oracle(std::span<const SphereField> samples) {
  if (samples.size() < 3) {
    throw ConfigError("reduction_factor_oracle needs at least 3 samples");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  double sum = 0.0;
  std::int64_t count = 0;

  for (const SphereField& u : samples) {
    const MetricField flat = build_flat_metric(u.grid);
    const EndoField j = j_from_u(u);
    const GradField dj = covariant_derivative(j, flat);
    const ScalarField ju = grad_norm_sq(dj, flat);
    const ScalarField uu = sphere_grad_norm_sq(u);
    for (std::size_t p = 0; p < uu.v.size(); ++p) {
      if (uu.v[p] > 1e-8) {
        const double ratio = ju.v[p] / uu.v[p];
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        sum += ratio;
        ++count;
      }
    }
  }
  if (count == 0) {
    throw ConfigError("reduction_factor_oracle: all samples have vanishing gradient");
  }
  const double mean = sum / double(count);
  if ((hi - lo) / mean > 1e-6) {
    throw ConfigError("reduction_factor_oracle: ratio spread " +
                      std::to_string(hi - lo) + " exceeds tolerance");
  }
  return mean;
}

CrossValidateReport cross_validate(const EndoField& j0, double t_end,
                                   const StepControl& ctrl,
                                   const MetricField& metric, int sample_every,
                                   double tol) {
  if (!metric.is_flat()) {
    throw ConfigError("cross_validate requires the flat metric");
  }
  const double dt = ctrl.dt_override ? *ctrl.dt_override
                                     : cfl_dt(j0.grid, metric, ctrl);

  SphereField u = u_from_j(j0);
  FlowState state;
  state.j = j0;

  CrossValidateReport rep;
  rep.tol = tol;

  FlowWorkspace ws;
  double t = 0.0;
  long step_count = 0;
  while (t < t_end - 1e-15) {
    const double h = std::min(dt, t_end - t);
    state = step(state, ctrl, metric, ws, h);
    u = harmonic_map_flow_step(u, h);
    t = state.t;
    ++step_count;
    if (step_count % sample_every == 0 || t >= t_end - 1e-15) {
      const SphereField ut = u_from_j(state.j);
      const double d = sphere_distance(ut, u);
      rep.times.push_back(t);
      rep.sup_distance.push_back(d);
      rep.max_distance = std::max(rep.max_distance, d);
    }
  }
  rep.passed = rep.max_distance < tol;
  return rep;
}

}  // namespace acflow
