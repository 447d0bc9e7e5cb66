#pragma once

#include <optional>
#include <string>
#include <vector>

#include "acflow/fields.hpp"
#include "acflow/metric.hpp"
#include "acflow/records.hpp"
#include "acflow/tensor_ops_detail.hpp"

namespace acflow {

enum class Scheme { euler, rk4 };

struct StepControl {
  Scheme scheme = Scheme::rk4;
  double cfl_safety = 0.5;
  std::optional<double> dt_override;
  int project_every = 10;  ///< 0 = never project
  double t_end = 0.0;
  double stop_tension_tol = 1e-6;
  double blowup_e_factor = 10.0;
  double delta_lemma32 = 0.1;

  void validate() const;
};

/// Explicit-scheme stability bound dt = cfl_safety * h^2 / (2 n lambda_max),
/// with h the smallest non-thin spacing and lambda_max the grid maximum
/// eigenvalue of g_inv.
double cfl_dt(const GridSpec& grid, const MetricField& metric,
              const StepControl& ctrl);

struct FlowState {
  EndoField j;
  double t = 0.0;
  long step_index = 0;
  double last_dt = 0.0;
  long projections_applied = 0;
};

/// Scratch buffers reused across steps so the hot loop never allocates.
struct FlowWorkspace {
  GradField grad;
  EndoField stage, k, acc;
};

/// Observables of the state a step departs from, produced as by-products of
/// the first tension evaluation. The integrals are only filled when
/// want_integrals is set on entry.
struct StepObservables {
  bool want_integrals = false;
  double e_max = 0.0;
  double tension_sup = 0.0;
  double energy = 0.0;
  double tension_l2sq = 0.0;
};

/// Advances one step (dt from ctrl), projecting onto the constraint set when
/// the new step index is a multiple of project_every. Throws NonFiniteError
/// or ConstraintBlowupError (constraint drift > 0.1 found at projection time).
FlowState step(const FlowState& state, const StepControl& ctrl,
               const MetricField& metric);

/// Workspace-reusing variant with an explicit dt.
FlowState step(const FlowState& state, const StepControl& ctrl,
               const MetricField& metric, FlowWorkspace& ws, double dt,
               StepObservables* obs = nullptr);

struct ExistenceWindow {
  double window;   ///< delta * arctan(1 / (2 e_bar0))
  double e_bound;  ///< 2 e_bar0 + 1 / e_bar0
};

/// Guaranteed-existence horizon from the doubling-time lemma. Throws
/// ConfigError on nonpositive input.
ExistenceWindow existence_window(double e_bar0, double delta);

/// Horizon for data with |nabla J_0| <= K, i.e. existence_window at K^2.
double existence_horizon_from_grad_bound(double grad_bound, double delta);

enum class Verdict { KAHLER_LIMIT, BLOWUP_CANDIDATE, TIME_LIMIT };

std::string to_string(Verdict v);

struct Lemma32Window {
  double t0 = 0.0;
  double e_bar0 = 0.0;
  double window = 0.0;
  double bound = 0.0;
};

struct RunResult {
  Verdict verdict = Verdict::TIME_LIMIT;
  std::string reason;  ///< converged | time_limit | e_factor | lemma32 | nonfinite | constraint_drift
  double t_signal = -1.0;
  double e_bar0 = 0.0;
  std::vector<DiagnosticsRecord> records;
  std::vector<Lemma32Window> windows;
  FlowState final_state;
};

}  // namespace acflow
