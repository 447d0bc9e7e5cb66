#include "acflow/snapshot.hpp"

#include <cstring>
#include <fstream>

#include "acflow/errors.hpp"

namespace acflow {

namespace {

constexpr char kMagic[4] = {'A', 'C', 'J', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::ifstream& is, const char* what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw SnapshotError(std::string("truncated snapshot: ") + what);
  return v;
}

}  // namespace

std::size_t snapshot_file_size(const GridSpec& grid, MetricTag tag) {
  std::size_t header = 4 + 4 + 4 + 4 * 4 + 4 * 8 + 4 + 8;
  if (tag == MetricTag::perturbed) header += 8 + 8;
  return header + 8 * std::size_t(grid.num_points()) * 16;
}

void write_snapshot(const EndoField& field, const MetricField& metric,
                    const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw SnapshotError("cannot open " + path.string() + " for writing");

  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, std::uint32_t(GridSpec::dim));
  for (int a = 0; a < 4; ++a) put(os, std::uint32_t(field.grid.n[std::size_t(a)]));
  for (int a = 0; a < 4; ++a) put(os, field.grid.length[std::size_t(a)]);
  put(os, std::uint32_t(metric.tag() == MetricTag::flat ? 0 : 1));
  if (metric.tag() == MetricTag::perturbed) {
    put(os, metric.amplitude());
    put(os, metric.seed());
  }
  put(os, field.time);

  for (const Mat4& m : field.j) {
    for (int beta = 0; beta < 4; ++beta) {
      for (int alpha = 0; alpha < 4; ++alpha) {
        put(os, m(beta, alpha));
      }
    }
  }
  if (!os) throw SnapshotError("write failed for " + path.string());
}

SnapshotData read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SnapshotError("cannot open " + path.string());

  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw SnapshotError("bad magic in " + path.string());
  }
  const auto version = take<std::uint32_t>(is, "version");
  if (version != kVersion) {
    throw SnapshotError("unsupported snapshot version " +
                        std::to_string(version));
  }
  const auto dim = take<std::uint32_t>(is, "dim");
  if (dim != 4) throw SnapshotError("unsupported dim");

  SnapshotData snap;
  for (int a = 0; a < 4; ++a) {
    snap.grid.n[std::size_t(a)] = int(take<std::uint32_t>(is, "n"));
  }
  for (int a = 0; a < 4; ++a) {
    snap.grid.length[std::size_t(a)] = take<double>(is, "length");
  }
  const auto tag = take<std::uint32_t>(is, "metric tag");
  if (tag > 1) throw SnapshotError("unknown metric tag");
  snap.tag = tag == 0 ? MetricTag::flat : MetricTag::perturbed;
  if (snap.tag == MetricTag::perturbed) {
    snap.amplitude = take<double>(is, "amplitude");
    snap.seed = take<std::uint64_t>(is, "seed");
  }
  snap.field.grid = snap.grid;
  snap.field.time = take<double>(is, "time");

  const std::int64_t np = snap.grid.num_points();
  snap.field.j.resize(std::size_t(np));
  for (Mat4& m : snap.field.j) {
    for (int beta = 0; beta < 4; ++beta) {
      for (int alpha = 0; alpha < 4; ++alpha) {
        m(beta, alpha) = take<double>(is, "payload");
      }
    }
  }
  return snap;
}

}  // namespace acflow
