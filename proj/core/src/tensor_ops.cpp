#include "acflow/tensor_ops.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "acflow/errors.hpp"
#include "acflow/reduce.hpp"
#include "acflow/tensor_ops_detail.hpp"

namespace acflow {

namespace {

struct StencilCoeffs {
  std::array<double, 4> c1;  // 8/(12 h)
  std::array<double, 4> c2;  // -1/(12 h)
};

StencilCoeffs stencil_coeffs(const GridSpec& grid) {
  StencilCoeffs s;
  for (int a = 0; a < 4; ++a) {
    const double h = grid.spacing(a);
    s.c1[std::size_t(a)] = 8.0 / (12.0 * h);
    s.c2[std::size_t(a)] = -1.0 / (12.0 * h);
  }
  return s;
}

// slots in NeighborTable: 0 -> -2, 1 -> -1, 2 -> +1, 3 -> +2

inline double pointwise_grad_norm_sq(const std::array<Mat4, 4>& d,
                                     const MetricField& metric,
                                     std::int64_t p) {
  if (metric.is_flat()) {
    return d[0].squaredNorm() + d[1].squaredNorm() + d[2].squaredNorm() +
           d[3].squaredNorm();
  }
  const Mat4& g = metric.g(p);
  const Mat4& gi = metric.g_inv(p);
  double s = 0.0;
  Mat4 lowered[4];
  for (int k = 0; k < 4; ++k) lowered[k] = g * d[std::size_t(k)] * gi;
  for (int k1 = 0; k1 < 4; ++k1) {
    for (int k2 = 0; k2 < 4; ++k2) {
      s += gi(k1, k2) *
           lowered[k1].cwiseProduct(d[std::size_t(k2)]).sum();
    }
  }
  return s;
}

}  // namespace

double inner_g(const Mat4& s, const Mat4& t, const Mat4& g, const Mat4& ginv) {
  return (g * s * ginv).cwiseProduct(t).sum();
}

GradField covariant_derivative(const EndoField& j, const MetricField& metric) {
  GradField out;
  detail::covariant_derivative_into(j, metric, out);
  return out;
}

namespace detail {

void covariant_derivative_into(const EndoField& j, const MetricField& metric,
                               GradField& out) {
  const GridSpec& grid = j.grid;
  const NeighborTable nt(grid);
  const StencilCoeffs sc = stencil_coeffs(grid);
  const Mat4* J = j.j.data();

  out.grid = grid;
  out.dj.resize(j.j.size());
  auto* D = out.dj.data();

  const bool flat = metric.is_flat();
  const auto& n = grid.n;

#pragma omp parallel for collapse(2) schedule(static)
  for (int i0 = 0; i0 < n[0]; ++i0) {
    for (int i1 = 0; i1 < n[1]; ++i1) {
      std::int64_t idx =
          ((std::int64_t(i0) * n[1] + i1) * n[2]) * n[3];
      for (int i2 = 0; i2 < n[2]; ++i2) {
        for (int i3 = 0; i3 < n[3]; ++i3, ++idx) {
          const int c[4] = {i0, i1, i2, i3};
          for (int a = 0; a < 4; ++a) {
            const auto sa = std::size_t(a);
            const Mat4& jp1 = J[idx + nt.offset(a, c[a], 2)];
            const Mat4& jm1 = J[idx + nt.offset(a, c[a], 1)];
            const Mat4& jp2 = J[idx + nt.offset(a, c[a], 3)];
            const Mat4& jm2 = J[idx + nt.offset(a, c[a], 0)];
            Mat4 d = sc.c1[sa] * (jp1 - jm1) + sc.c2[sa] * (jp2 - jm2);
            if (!flat) {
              const Mat4& G = metric.chris(idx, a);
              d.noalias() += G * J[idx] - J[idx] * G;
            }
            D[idx][sa] = d;
          }
        }
      }
    }
  }
}

// Divergence of the gradient (the rough Laplacian) and the quadratic term,
// evaluated in a single pass; optional sup statistics come along for free.
void tension_pass(const EndoField& j, const GradField& grad,
                  const MetricField& metric, Mode mode, EndoField& out,
                  TensionStats* stats) {
  const GridSpec& grid = j.grid;
  const NeighborTable nt(grid);
  const StencilCoeffs sc = stencil_coeffs(grid);
  const Mat4* J = j.j.data();
  const auto* T = grad.dj.data();

  out.grid = grid;
  out.time = j.time;
  out.j.resize(j.j.size());
  Mat4* O = out.j.data();

  const bool flat = metric.is_flat();
  const auto& n = grid.n;

  double emax = 0.0;
  double tsup = 0.0;

#pragma omp parallel for collapse(2) schedule(static) \
    reduction(max : emax, tsup)
  for (int i0 = 0; i0 < n[0]; ++i0) {
    for (int i1 = 0; i1 < n[1]; ++i1) {
      std::int64_t idx =
          ((std::int64_t(i0) * n[1] + i1) * n[2]) * n[3];
      for (int i2 = 0; i2 < n[2]; ++i2) {
        for (int i3 = 0; i3 < n[3]; ++i3, ++idx) {
          const int c[4] = {i0, i1, i2, i3};
          Mat4 lap = Mat4::Zero();
          if (mode != Mode::nonlinear_only) {
            if (flat) {
              for (int a = 0; a < 4; ++a) {
                const auto sa = std::size_t(a);
                lap.noalias() +=
                    sc.c1[sa] * (T[idx + nt.offset(a, c[a], 2)][sa] -
                                 T[idx + nt.offset(a, c[a], 1)][sa]) +
                    sc.c2[sa] * (T[idx + nt.offset(a, c[a], 3)][sa] -
                                 T[idx + nt.offset(a, c[a], 0)][sa]);
              }
            } else {
              const Mat4& gi = metric.g_inv(idx);
              for (int q = 0; q < 4; ++q) {
                const Mat4& Tq = T[idx][std::size_t(q)];
                for (int p = 0; p < 4; ++p) {
                  const double w = gi(p, q);
                  if (w == 0.0) continue;
                  const auto sp = std::size_t(p);
                  Mat4 cov = sc.c1[sp] *
                                 (T[idx + nt.offset(p, c[p], 2)][std::size_t(q)] -
                                  T[idx + nt.offset(p, c[p], 1)][std::size_t(q)]) +
                             sc.c2[sp] *
                                 (T[idx + nt.offset(p, c[p], 3)][std::size_t(q)] -
                                  T[idx + nt.offset(p, c[p], 0)][std::size_t(q)]);
                  const Mat4& G = metric.chris(idx, p);
                  cov.noalias() += G * Tq - Tq * G;
                  for (int l = 0; l < 4; ++l) {
                    cov.noalias() -= G(l, q) * T[idx][std::size_t(l)];
                  }
                  lap.noalias() += w * cov;
                }
              }
            }
          }

          Mat4 nl = Mat4::Zero();
          if (mode != Mode::laplacian_only) {
            const auto& d = T[idx];
            Mat4 b;
            if (flat) {
              b.noalias() = d[0] * d[0];
              b.noalias() += d[1] * d[1];
              b.noalias() += d[2] * d[2];
              b.noalias() += d[3] * d[3];
            } else {
              const Mat4& gi = metric.g_inv(idx);
              b.setZero();
              for (int q = 0; q < 4; ++q) {
                Mat4 cq = gi(0, q) * d[0] + gi(1, q) * d[1] + gi(2, q) * d[2] +
                          gi(3, q) * d[3];
                b.noalias() += cq * d[std::size_t(q)];
              }
            }
            nl.noalias() = b * J[idx];
          }

          Mat4 res;
          switch (mode) {
            case Mode::laplacian_only: res = lap; break;
            case Mode::nonlinear_only: res = nl; break;
            default: res = lap - nl;
          }
          O[idx] = res;

          if (stats) {
            emax = std::max(emax,
                            0.5 * pointwise_grad_norm_sq(T[idx], metric, idx));
            double tn;
            if (flat) {
              tn = res.squaredNorm();
            } else {
              tn = inner_g(res, res, metric.g(idx), metric.g_inv(idx));
            }
            tsup = std::max(tsup, tn);
          }
        }
      }
    }
  }

  if (stats) {
    stats->e_max = emax;
    stats->tension_sup = std::sqrt(tsup);
  }
}

}  // namespace detail

EndoField rough_laplacian(const EndoField& j, const MetricField& metric) {
  GradField grad = covariant_derivative(j, metric);
  EndoField out;
  detail::tension_pass(j, grad, metric, detail::Mode::laplacian_only, out,
                       nullptr);
  return out;
}

EndoField nonlinear_term(const EndoField& j, const MetricField& metric) {
  GradField grad = covariant_derivative(j, metric);
  EndoField out;
  detail::tension_pass(j, grad, metric, detail::Mode::nonlinear_only, out,
                       nullptr);
  return out;
}

EndoField tension(const EndoField& j, const MetricField& metric) {
  GradField grad = covariant_derivative(j, metric);
  EndoField out;
  detail::tension_pass(j, grad, metric, detail::Mode::full, out, nullptr);
  return out;
}

ScalarField grad_norm_sq(const GradField& dj, const MetricField& metric) {
  ScalarField out = ScalarField::zeros(dj.grid);
  const std::int64_t np = dj.grid.num_points();
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    out.v[std::size_t(p)] =
        pointwise_grad_norm_sq(dj.dj[std::size_t(p)], metric, p);
  }
  return out;
}

double energy(const EndoField& j, const MetricField& metric) {
  GradField grad = covariant_derivative(j, metric);
  ScalarField density = grad_norm_sq(grad, metric);
  return integrate_scalar(density.v, metric);
}

ScalarField energy_density(const EndoField& j, const MetricField& metric) {
  GradField grad = covariant_derivative(j, metric);
  ScalarField density = grad_norm_sq(grad, metric);
  for (double& v : density.v) v *= 0.5;
  return density;
}

ConstraintResiduals constraint_residuals(const EndoField& j,
                                         const MetricField& metric) {
  const std::int64_t np = j.grid.num_points();
  std::vector<double> a_sq(static_cast<std::size_t>(np)), b_sq(static_cast<std::size_t>(np));
  double a_max = 0.0, b_max = 0.0;

#pragma omp parallel for schedule(static) reduction(max : a_max, b_max)
  for (std::int64_t p = 0; p < np; ++p) {
    const Mat4& J = j.j[std::size_t(p)];
    const Mat4 B = J * J + Mat4::Identity();
    Mat4 A;
    if (metric.is_flat()) {
      A = J.transpose() * J - Mat4::Identity();
    } else {
      const Mat4& g = metric.g(p);
      A = J.transpose() * g * J - g;
    }
    a_max = std::max(a_max, A.cwiseAbs().maxCoeff());
    b_max = std::max(b_max, B.cwiseAbs().maxCoeff());
    a_sq[std::size_t(p)] = A.squaredNorm();
    b_sq[std::size_t(p)] = B.squaredNorm();
  }

  ConstraintResiduals r;
  r.a_max = a_max;
  r.b_max = b_max;
  r.a_l2 = std::sqrt(integrate_scalar(a_sq, metric));
  r.b_l2 = std::sqrt(integrate_scalar(b_sq, metric));
  return r;
}

bool is_compatible(const EndoField& j, const MetricField& metric, double tol) {
  const ConstraintResiduals r = constraint_residuals(j, metric);
  return std::max(r.a_max, r.b_max) < tol;
}

EndoField project_compatible(const EndoField& jraw,
                             const MetricField& metric) {
  const std::int64_t np = jraw.grid.num_points();
  EndoField out;
  out.grid = jraw.grid;
  out.time = jraw.time;
  out.j.resize(jraw.j.size());
  const bool flat = metric.is_flat();

  std::int64_t singular_at = -1;

#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    Mat4 jt, lt, lt_inv;
    if (flat) {
      jt = jraw.j[std::size_t(p)];
    } else {
      const Eigen::LLT<Mat4> llt(metric.g(p));
      lt = Mat4(llt.matrixL()).transpose();
      lt_inv = lt.triangularView<Eigen::Upper>().solve(Mat4::Identity());
      jt = lt * jraw.j[std::size_t(p)] * lt_inv;
    }
    const Mat4 K = 0.5 * (jt - jt.transpose());
    const Mat4 S = K.transpose() * K;
    const Eigen::SelfAdjointEigenSolver<Mat4> es(S);
    const auto& ev = es.eigenvalues();
    if (ev.minCoeff() <= 1e-24 * std::max(1.0, ev.maxCoeff())) {
#pragma omp critical
      singular_at = p;
      continue;
    }
    Mat4 inv_sqrt = Mat4::Zero();
    for (int k = 0; k < 4; ++k) {
      inv_sqrt.noalias() += (1.0 / std::sqrt(ev(k))) *
                            es.eigenvectors().col(k) *
                            es.eigenvectors().col(k).transpose();
    }
    const Mat4 P = K * inv_sqrt;
    out.j[std::size_t(p)] = flat ? P : Mat4(lt_inv * P * lt);
  }

  if (singular_at >= 0) {
    throw NonFiniteError("project_compatible: antisymmetric part singular at point " +
                         std::to_string(singular_at));
  }
  return out;
}

Mat4 CommutatorField::at(std::int64_t p, int i, int j) const {
  static constexpr int slot[4][4] = {{-1, 0, 1, 2},
                                     {-1, -1, 3, 4},
                                     {-1, -1, -1, 5},
                                     {-1, -1, -1, -1}};
  if (i == j) return Mat4::Zero();
  if (i < j) return comm[std::size_t(p)][std::size_t(slot[i][j])];
  return -comm[std::size_t(p)][std::size_t(slot[j][i])];
}

CommutatorField commutator_curvature_term(const EndoField& j,
                                          const MetricField& metric) {
  const std::int64_t np = j.grid.num_points();
  CommutatorField out;
  out.grid = j.grid;
  out.comm.resize(std::size_t(np));

#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    const Mat4& J = j.j[std::size_t(p)];
    int s = 0;
    for (int i = 0; i < 4; ++i) {
      for (int k = i + 1; k < 4; ++k, ++s) {
        if (metric.is_flat()) {
          out.comm[std::size_t(p)][std::size_t(s)] = Mat4::Zero();
        } else {
          const Mat4 R = metric.riem(p, i, k);
          out.comm[std::size_t(p)][std::size_t(s)] = R * J - J * R;
        }
      }
    }
  }
  return out;
}

double l2_inner(const EndoField& s, const EndoField& t,
                const MetricField& metric) {
  const std::int64_t np = s.grid.num_points();
  std::vector<double> buf(static_cast<std::size_t>(np));
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    if (metric.is_flat()) {
      buf[std::size_t(p)] =
          s.j[std::size_t(p)].cwiseProduct(t.j[std::size_t(p)]).sum();
    } else {
      buf[std::size_t(p)] = inner_g(s.j[std::size_t(p)], t.j[std::size_t(p)],
                                    metric.g(p), metric.g_inv(p));
    }
  }
  return integrate_scalar(buf, metric);
}

double sup_norm_g(const EndoField& s, const MetricField& metric) {
  const std::int64_t np = s.grid.num_points();
  double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m)
  for (std::int64_t p = 0; p < np; ++p) {
    double v;
    if (metric.is_flat()) {
      v = s.j[std::size_t(p)].squaredNorm();
    } else {
      v = inner_g(s.j[std::size_t(p)], s.j[std::size_t(p)], metric.g(p),
                  metric.g_inv(p));
    }
    m = std::max(m, v);
  }
  return std::sqrt(m);
}

double sup_grad_pairing(const GradField& dj, const EndoField& s,
                        const MetricField& metric) {
  const std::int64_t np = s.grid.num_points();
  double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m)
  for (std::int64_t p = 0; p < np; ++p) {
    for (int i = 0; i < 4; ++i) {
      double v;
      if (metric.is_flat()) {
        v = dj.dj[std::size_t(p)][std::size_t(i)]
                .cwiseProduct(s.j[std::size_t(p)])
                .sum();
      } else {
        v = inner_g(dj.dj[std::size_t(p)][std::size_t(i)],
                    s.j[std::size_t(p)], metric.g(p), metric.g_inv(p));
      }
      m = std::max(m, std::abs(v));
    }
  }
  return m;
}

namespace {

// Second covariant derivative W_ij = nabla_i (nabla J)_j streamed from a
// materialized gradient; norm via the full metric contraction.
struct HessFieldResult {
  std::vector<std::array<Mat4, 16>> w;  // w[p][4*i + j]
  double sup = 0.0;
};

double hess_norm_sq(const std::array<Mat4, 16>& w, const MetricField& metric,
                    std::int64_t p) {
  if (metric.is_flat()) {
    double s = 0.0;
    for (const auto& m : w) s += m.squaredNorm();
    return s;
  }
  const Mat4& g = metric.g(p);
  const Mat4& gi = metric.g_inv(p);
  double s = 0.0;
  std::array<Mat4, 16> low;
  for (int k = 0; k < 16; ++k) low[std::size_t(k)] = g * w[std::size_t(k)] * gi;
  for (int i1 = 0; i1 < 4; ++i1)
    for (int j1 = 0; j1 < 4; ++j1)
      for (int i2 = 0; i2 < 4; ++i2)
        for (int j2 = 0; j2 < 4; ++j2) {
          const double wgt = gi(i1, i2) * gi(j1, j2);
          if (wgt == 0.0) continue;
          s += wgt * low[std::size_t(4 * i1 + j1)]
                         .cwiseProduct(w[std::size_t(4 * i2 + j2)])
                         .sum();
        }
  return s;
}

HessFieldResult hessian_field(const EndoField& j, const MetricField& metric,
                              bool keep_field) {
  const GridSpec& grid = j.grid;
  const NeighborTable nt(grid);
  const StencilCoeffs sc = stencil_coeffs(grid);
  const GradField grad = covariant_derivative(j, metric);
  const auto* T = grad.dj.data();
  const bool flat = metric.is_flat();
  const auto& n = grid.n;

  HessFieldResult res;
  if (keep_field) res.w.resize(j.j.size());
  double sup = 0.0;

#pragma omp parallel for collapse(2) schedule(static) reduction(max : sup)
  for (int i0 = 0; i0 < n[0]; ++i0) {
    for (int i1 = 0; i1 < n[1]; ++i1) {
      std::int64_t idx = ((std::int64_t(i0) * n[1] + i1) * n[2]) * n[3];
      for (int i2 = 0; i2 < n[2]; ++i2) {
        for (int i3 = 0; i3 < n[3]; ++i3, ++idx) {
          const int c[4] = {i0, i1, i2, i3};
          std::array<Mat4, 16> w;
          for (int di = 0; di < 4; ++di) {
            const auto si = std::size_t(di);
            for (int dj = 0; dj < 4; ++dj) {
              Mat4 m =
                  sc.c1[si] * (T[idx + nt.offset(di, c[di], 2)][std::size_t(dj)] -
                               T[idx + nt.offset(di, c[di], 1)][std::size_t(dj)]) +
                  sc.c2[si] * (T[idx + nt.offset(di, c[di], 3)][std::size_t(dj)] -
                               T[idx + nt.offset(di, c[di], 0)][std::size_t(dj)]);
              if (!flat) {
                const Mat4& G = metric.chris(idx, di);
                const Mat4& Tj = T[idx][std::size_t(dj)];
                m.noalias() += G * Tj - Tj * G;
                for (int l = 0; l < 4; ++l) {
                  m.noalias() -= G(l, dj) * T[idx][std::size_t(l)];
                }
              }
              w[std::size_t(4 * di + dj)] = m;
            }
          }
          sup = std::max(sup, hess_norm_sq(w, metric, idx));
          if (keep_field) res.w[std::size_t(idx)] = w;
        }
      }
    }
  }
  res.sup = std::sqrt(sup);
  return res;
}

}  // namespace

double sup_higher_derivative(const EndoField& j, const MetricField& metric,
                             int m) {
  if (m == 2) {
    return hessian_field(j, metric, false).sup;
  }
  if (m != 3) {
    throw ConfigError("sup_higher_derivative supports m in {2, 3}");
  }

  const HessFieldResult hess = hessian_field(j, metric, true);
  const GridSpec& grid = j.grid;
  const NeighborTable nt(grid);
  const StencilCoeffs sc = stencil_coeffs(grid);
  const auto* W = hess.w.data();
  const bool flat = metric.is_flat();
  const auto& n = grid.n;
  double sup = 0.0;

#pragma omp parallel for collapse(2) schedule(static) reduction(max : sup)
  for (int i0 = 0; i0 < n[0]; ++i0) {
    for (int i1 = 0; i1 < n[1]; ++i1) {
      std::int64_t idx = ((std::int64_t(i0) * n[1] + i1) * n[2]) * n[3];
      for (int i2 = 0; i2 < n[2]; ++i2) {
        for (int i3 = 0; i3 < n[3]; ++i3, ++idx) {
          const int c[4] = {i0, i1, i2, i3};
          std::array<Mat4, 64> w3;  // [16*k + 4*i + j]
          for (int dk = 0; dk < 4; ++dk) {
            const auto sk = std::size_t(dk);
            for (int slot = 0; slot < 16; ++slot) {
              Mat4 m = sc.c1[sk] * (W[idx + nt.offset(dk, c[dk], 2)][std::size_t(slot)] -
                                    W[idx + nt.offset(dk, c[dk], 1)][std::size_t(slot)]) +
                       sc.c2[sk] * (W[idx + nt.offset(dk, c[dk], 3)][std::size_t(slot)] -
                                    W[idx + nt.offset(dk, c[dk], 0)][std::size_t(slot)]);
              if (!flat) {
                const int di = slot / 4, dj = slot % 4;
                const Mat4& G = metric.chris(idx, dk);
                const Mat4& Wl = W[idx][std::size_t(slot)];
                m.noalias() += G * Wl - Wl * G;
                for (int l = 0; l < 4; ++l) {
                  m.noalias() -= G(l, di) * W[idx][std::size_t(4 * l + dj)];
                  m.noalias() -= G(l, dj) * W[idx][std::size_t(4 * di + l)];
                }
              }
              w3[std::size_t(16 * dk + slot)] = m;
            }
          }
          double norm_sq = 0.0;
          if (flat) {
            for (const auto& m : w3) norm_sq += m.squaredNorm();
          } else {
            const Mat4& g = metric.g(idx);
            const Mat4& gi = metric.g_inv(idx);
            std::array<Mat4, 64> low;
            for (int s = 0; s < 64; ++s) {
              low[std::size_t(s)] = g * w3[std::size_t(s)] * gi;
            }
            for (int s1 = 0; s1 < 64; ++s1) {
              const int k1 = s1 / 16, i1a = (s1 / 4) % 4, j1 = s1 % 4;
              for (int s2 = 0; s2 < 64; ++s2) {
                const int k2 = s2 / 16, i2a = (s2 / 4) % 4, j2 = s2 % 4;
                const double wgt = gi(k1, k2) * gi(i1a, i2a) * gi(j1, j2);
                if (wgt == 0.0) continue;
                norm_sq += wgt * low[std::size_t(s1)]
                                     .cwiseProduct(w3[std::size_t(s2)])
                                     .sum();
              }
            }
          }
          sup = std::max(sup, norm_sq);
        }
      }
    }
  }
  return std::sqrt(sup);
}

}  // namespace acflow
