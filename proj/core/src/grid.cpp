#include "acflow/grid.hpp"

#include <algorithm>

#include "acflow/errors.hpp"

namespace acflow {

void GridSpec::validate() const {
  for (int a = 0; a < dim; ++a) {
    if (length[a] <= 0.0) {
      throw ConfigError("grid.length[" + std::to_string(a) +
                        "] must be positive");
    }
    if (thin[a]) {
      if (n[a] < 1) {
        throw ConfigError("grid.n[" + std::to_string(a) +
                          "] must be >= 1 on a thin axis");
      }
    } else if (n[a] < 8 || n[a] % 2 != 0) {
      throw ConfigError("grid.n[" + std::to_string(a) +
                        "] must be even and >= 8 on a non-thin axis");
    }
  }
}

double GridSpec::min_spacing() const {
  double h = spacing(0);
  bool found = false;
  for (int a = 0; a < dim; ++a) {
    if (thin[a]) continue;
    h = found ? std::min(h, spacing(a)) : spacing(a);
    found = true;
  }
  if (!found) {
    h = *std::min_element(length.begin(), length.end());
    for (int a = 0; a < dim; ++a) h = std::min(h, spacing(a));
  }
  return h;
}

NeighborTable::NeighborTable(const GridSpec& grid) {
  const auto strides = grid.strides();
  for (int a = 0; a < GridSpec::dim; ++a) {
    const int n = grid.n[a];
    table_[a].resize(std::size_t(n) * 4);
    for (int i = 0; i < n; ++i) {
      const int shifts[4] = {-2, -1, 1, 2};
      for (int s = 0; s < 4; ++s) {
        int w = ((i + shifts[s]) % n + n) % n;
        table_[a][std::size_t(i) * 4 + std::size_t(s)] =
            std::int64_t(w - i) * strides[std::size_t(a)];
      }
    }
  }
}

}  // namespace acflow
