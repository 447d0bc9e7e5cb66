#pragma once

#include <filesystem>

#include "acflow/fields.hpp"
#include "acflow/metric.hpp"

namespace acflow {

/// Field snapshot as stored on disk. Grid thin flags are not part of the
/// format; they belong to the run configuration.
struct SnapshotData {
  GridSpec grid;
  MetricTag tag = MetricTag::flat;
  double amplitude = 0.0;
  std::uint64_t seed = 0;
  EndoField field;
};

/// Binary layout, little-endian throughout:
///   magic "ACJF", version u32 = 1, dim u32, N u32 per axis, L f64 per axis,
///   metric tag u32 (0 flat, 1 perturbed; followed by amplitude f64 and
///   seed u64 when perturbed), time f64, then the payload: one f64 per
///   component, grid points in lexicographic order, upper index beta outer,
///   lower index alpha inner.
void write_snapshot(const EndoField& field, const MetricField& metric,
                    const std::filesystem::path& path);

SnapshotData read_snapshot(const std::filesystem::path& path);

/// Header + 8 * num_points * 16 bytes; used by size checks.
std::size_t snapshot_file_size(const GridSpec& grid, MetricTag tag);

}  // namespace acflow
