#pragma once

#include <functional>

#include "acflow/config.hpp"
#include "acflow/flow.hpp"

namespace acflow {

struct RunCallbacks {
  /// Invoked with the initial state, every snapshot_every-th step (when
  /// positive) and the final state.
  std::function<void(const FlowState&)> on_snapshot;
};

/// Integrates the flow until t_end, convergence or a blow-up signal, with
/// per-step monitors: non-finite values, the configured blow-up energy
/// factor, the doubling-time window bound (5% relative slack) and the
/// convergence thresholds. Fully deterministic given the config.
RunResult run(const RunConfig& cfg, const RunCallbacks& cb = {});

}  // namespace acflow
