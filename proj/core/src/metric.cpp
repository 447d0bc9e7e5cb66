#include "acflow/metric.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "acflow/errors.hpp"
#include "acflow/reduce.hpp"

namespace acflow {

const Mat4 MetricField::identity_ = Mat4::Identity();
const Mat4 MetricField::zero_ = Mat4::Zero();

namespace {

inline int pair_slot(int i, int j) {
  // (0,1)->0 (0,2)->1 (0,3)->2 (1,2)->3 (1,3)->4 (2,3)->5, requires i<j
  static constexpr int slot[4][4] = {{-1, 0, 1, 2},
                                     {-1, -1, 3, 4},
                                     {-1, -1, -1, 5},
                                     {-1, -1, -1, -1}};
  return slot[i][j];
}

// One trigonometric product mode of the perturbation series.
// factor type per axis: 0 = constant 1, 1 = sin, 2 = cos.
struct Mode {
  double c = 0.0;
  std::array<int, 4> k{0, 0, 0, 0};
  std::array<int, 4> type{0, 0, 0, 0};
};

constexpr int kModesPerEntry = 3;

// Uniform double in [-1, 1) from raw engine bits; avoids distribution
// objects so the stream is identical on every platform.
double uniform_pm1(std::mt19937_64& rng) {
  return 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const std::uint64_t span = std::uint64_t(hi - lo + 1);
  return lo + int(rng() % span);
}

std::array<std::array<std::vector<Mode>, 4>, 4> draw_modes(
    const GridSpec& grid, std::uint64_t seed) {
  std::array<std::array<std::vector<Mode>, 4>, 4> modes;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      auto& entry = modes[std::size_t(i)][std::size_t(j)];
      entry.resize(kModesPerEntry);
      for (auto& m : entry) {
        m.c = uniform_pm1(rng) / kModesPerEntry;  // sum |c| <= 1 per entry
        bool nonzero = false;
        for (int a = 0; a < 4; ++a) {
          int ka = grid.thin[a] ? 0 : uniform_int(rng, -2, 2);
          m.k[a] = ka;
          if (ka != 0) {
            m.type[a] = uniform_int(rng, 1, 2);
            nonzero = true;
          } else {
            m.type[a] = 0;
          }
        }
        if (!nonzero) {
          // force a constant-free mode on the first non-thin axis
          for (int a = 0; a < 4; ++a) {
            if (!grid.thin[a]) {
              m.k[a] = 1;
              m.type[a] = 2;
              break;
            }
          }
        }
      }
    }
  }
  return modes;
}

// Value, gradient and Hessian of one entry's mode sum at a point.
struct EntryJet {
  double v = 0.0;
  std::array<double, 4> d{};
  std::array<std::array<double, 4>, 4> dd{};
};

EntryJet eval_entry(const std::vector<Mode>& entry, const GridSpec& grid,
                    const std::array<double, 4>& x) {
  EntryJet jet{};
  for (const auto& m : entry) {
    double f[4], df[4], ddf[4];
    for (int a = 0; a < 4; ++a) {
      const double w = 2.0 * std::numbers::pi * m.k[a] / grid.length[a];
      const double th = w * x[std::size_t(a)];
      switch (m.type[a]) {
        case 1:
          f[a] = std::sin(th);
          df[a] = w * std::cos(th);
          ddf[a] = -w * w * std::sin(th);
          break;
        case 2:
          f[a] = std::cos(th);
          df[a] = -w * std::sin(th);
          ddf[a] = -w * w * std::cos(th);
          break;
        default:
          f[a] = 1.0;
          df[a] = 0.0;
          ddf[a] = 0.0;
      }
    }
    const double prod = f[0] * f[1] * f[2] * f[3];
    jet.v += m.c * prod;
    for (int b = 0; b < 4; ++b) {
      if (m.type[b] == 0) continue;
      double pb = df[b];
      for (int a = 0; a < 4; ++a) {
        if (a != b) pb *= f[a];
      }
      jet.d[std::size_t(b)] += m.c * pb;
      for (int c = b; c < 4; ++c) {
        double pbc;
        if (c == b) {
          pbc = ddf[b];
          for (int a = 0; a < 4; ++a) {
            if (a != b) pbc *= f[a];
          }
        } else {
          if (m.type[c] == 0) continue;
          pbc = df[b] * df[c];
          for (int a = 0; a < 4; ++a) {
            if (a != b && a != c) pbc *= f[a];
          }
        }
        jet.dd[std::size_t(b)][std::size_t(c)] += m.c * pbc;
        if (c != b) jet.dd[std::size_t(c)][std::size_t(b)] += m.c * pbc;
      }
    }
  }
  return jet;
}

}  // namespace

Mat4 MetricField::riem(std::int64_t p, int i, int j) const {
  if (is_flat() || i == j) return Mat4::Zero();
  if (i < j) return riem_[std::size_t(p)][std::size_t(pair_slot(i, j))];
  return -riem_[std::size_t(p)][std::size_t(pair_slot(j, i))];
}

MetricField build_flat_metric(const GridSpec& grid) {
  grid.validate();
  MetricField m;
  m.grid_ = grid;
  m.tag_ = MetricTag::flat;
  return m;
}

MetricField build_perturbed_metric(const GridSpec& grid, double amplitude,
                                   std::uint64_t seed) {
  grid.validate();
  if (amplitude < 0.0 || amplitude >= 0.2) {
    throw ConfigError("metric.amplitude must lie in [0, 0.2)");
  }
  if (amplitude == 0.0) return build_flat_metric(grid);

  const auto modes = draw_modes(grid, seed);
  const std::int64_t np = grid.num_points();

  MetricField m;
  m.grid_ = grid;
  m.tag_ = MetricTag::perturbed;
  m.amplitude_ = amplitude;
  m.seed_ = seed;
  m.g_.resize(std::size_t(np));
  m.g_inv_.resize(std::size_t(np));
  m.sqrt_det_.resize(std::size_t(np));
  m.chris_.resize(std::size_t(np));
  m.riem_.resize(std::size_t(np));

  double min_eig = std::numeric_limits<double>::infinity();
  double max_inv_eig = 0.0;

  for (std::int64_t p = 0; p < np; ++p) {
    const auto c = grid.coords(p);
    const std::array<double, 4> x = {grid.coord(0, c[0]), grid.coord(1, c[1]),
                                     grid.coord(2, c[2]), grid.coord(3, c[3])};

    EntryJet jet[4][4];
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) {
        jet[i][j] = eval_entry(modes[std::size_t(i)][std::size_t(j)], grid, x);
        if (j != i) jet[j][i] = jet[i][j];
      }
    }

    Mat4 g;
    double dg[4][4][4];    // dg[b][i][j] = d_b g_ij
    double ddg[4][4][4][4];  // ddg[b][c][i][j] = d_b d_c g_ij
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        g(i, j) = (i == j ? 1.0 : 0.0) + amplitude * jet[i][j].v;
        for (int b = 0; b < 4; ++b) {
          dg[b][i][j] = amplitude * jet[i][j].d[std::size_t(b)];
          for (int cc = 0; cc < 4; ++cc) {
            ddg[b][cc][i][j] =
                amplitude * jet[i][j].dd[std::size_t(b)][std::size_t(cc)];
          }
        }
      }
    }

    Eigen::SelfAdjointEigenSolver<Mat4> es(g);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());

    const Mat4 ginv = g.inverse();
    max_inv_eig = std::max(
        max_inv_eig,
        Eigen::SelfAdjointEigenSolver<Mat4>(ginv).eigenvalues().maxCoeff());

    m.g_[std::size_t(p)] = g;
    m.g_inv_[std::size_t(p)] = ginv;
    m.sqrt_det_[std::size_t(p)] = std::sqrt(g.determinant());

    // H_{lij} = d_i g_jl + d_j g_il - d_l g_ij, Gamma^k_ij = g^{kl} H_lij / 2
    double H[4][4][4];
    double gamma[4][4][4];
    for (int l = 0; l < 4; ++l) {
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          H[l][i][j] = dg[i][j][l] + dg[j][i][l] - dg[l][i][j];
        }
      }
    }
    for (int k = 0; k < 4; ++k) {
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          double s = 0.0;
          for (int l = 0; l < 4; ++l) s += ginv(k, l) * H[l][i][j];
          gamma[k][i][j] = 0.5 * s;
        }
      }
    }
    for (int k = 0; k < 4; ++k) {
      Mat4 gk;  // gk(b, l) = Gamma^b_{lk}
      for (int b = 0; b < 4; ++b) {
        for (int l = 0; l < 4; ++l) gk(b, l) = gamma[b][l][k];
      }
      m.chris_[std::size_t(p)][std::size_t(k)] = gk;
    }

    // d_m Gamma^k_ij = (d_m g^{kl}) H_lij / 2 + g^{kl} (d_m H_lij) / 2,
    // with d_m g^{-1} = -g^{-1} (d_m g) g^{-1}
    double dgamma[4][4][4][4];  // dgamma[m][k][i][j]
    for (int mm = 0; mm < 4; ++mm) {
      Mat4 dgm;
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) dgm(i, j) = dg[mm][i][j];
      }
      const Mat4 dginv = -ginv * dgm * ginv;
      for (int k = 0; k < 4; ++k) {
        for (int i = 0; i < 4; ++i) {
          for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int l = 0; l < 4; ++l) {
              const double dH =
                  ddg[mm][i][j][l] + ddg[mm][j][i][l] - ddg[mm][l][i][j];
              s += dginv(k, l) * H[l][i][j] + ginv(k, l) * dH;
            }
            dgamma[mm][k][i][j] = 0.5 * s;
          }
        }
      }
    }

    // R_ij^k_l = d_i Gamma^k_jl - d_j Gamma^k_il
    //          + Gamma^k_im Gamma^m_jl - Gamma^k_jm Gamma^m_il
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        Mat4 R;
        for (int k = 0; k < 4; ++k) {
          for (int l = 0; l < 4; ++l) {
            double s = dgamma[i][k][j][l] - dgamma[j][k][i][l];
            for (int mm = 0; mm < 4; ++mm) {
              s += gamma[k][i][mm] * gamma[mm][j][l] -
                   gamma[k][j][mm] * gamma[mm][i][l];
            }
            R(k, l) = s;
          }
        }
        m.riem_[std::size_t(p)][std::size_t(pair_slot(i, j))] = R;
      }
    }
  }

  if (min_eig <= 0.5) {
    throw ConfigError("metric.amplitude " + std::to_string(amplitude) +
                      " drives min eigenvalue of g to " +
                      std::to_string(min_eig) + " (<= 0.5)");
  }
  m.min_g_eig_ = min_eig;
  m.max_ginv_eig_ = max_inv_eig;
  return m;
}

double integrate_scalar(std::span<const double> f, const MetricField& metric) {
  const double cell = metric.grid().cell_volume();
  if (metric.is_flat()) {
    return pairwise_sum(f) * cell;
  }
  std::vector<double> weighted(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    weighted[i] = f[i] * metric.sqrt_det(std::int64_t(i));
  }
  return pairwise_sum(weighted) * cell;
}

}  // namespace acflow
