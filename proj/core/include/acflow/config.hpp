#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "acflow/flow.hpp"
#include "acflow/grid.hpp"
#include "acflow/initial_data.hpp"
#include "acflow/metric.hpp"

namespace acflow {

struct MetricConfig {
  MetricTag tag = MetricTag::flat;
  double amplitude = 0.0;
  std::uint64_t seed = 0;
};

enum class InitialKind { kahler, perturbation, bubble };

struct PerturbationConfig {
  double amplitude = 0.1;
  std::uint64_t seed = 1;
  int max_abs_mode = 2;
};

struct InitialConfig {
  InitialKind kind = InitialKind::kahler;
  PerturbationConfig perturbation;
  BubbleSpec bubble;
};

/// Local monotonicity probe: a space-time center, the cutoff radius pair
/// (rho_cut/2, rho_cut), the weight parameter N of the almost-monotonicity
/// inequality and the scales at which the time-integrated quantity is taken.
struct ProbeConfig {
  std::array<double, 4> x0{0.5, 0.5, 0.5, 0.5};
  double t0 = 0.0;  ///< T0, the backward-kernel reference time
  double rho_cut = 0.25;
  double n_weight = 7.38905609893065;  ///< e^2, so 1/ln^2 N = 1/4
  std::vector<double> r_list;

  void validate(const GridSpec& grid, const std::string& path) const;
};

struct OutputConfig {
  int snapshot_every = 0;  ///< in steps; 0 = initial and final only
  int record_every = 10;   ///< in steps
  std::string out_dir = "out";
};

struct RunConfig {
  GridSpec grid;
  MetricConfig metric;
  InitialConfig initial;
  StepControl control;
  std::vector<ProbeConfig> probes;
  OutputConfig output;

  void validate() const;
};

/// Parses and validates a UTF-8 JSON document. Unknown and duplicate keys
/// are rejected; error messages carry the path to the offending field.
RunConfig parse_config(const std::string& text);

/// Canonical serialization of a fully resolved config (defaults applied);
/// reparsing it reproduces the same RunConfig.
std::string serialize_config(const RunConfig& cfg);

/// FNV-1a 64-bit hash of the canonical serialization, hex-encoded.
std::string config_hash(const RunConfig& cfg);

MetricField build_metric(const RunConfig& cfg);
EndoField build_initial(const RunConfig& cfg, const MetricField& metric);

}  // namespace acflow
