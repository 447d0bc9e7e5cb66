#include "acflow/flow.hpp"

#include <cmath>

#include "acflow/errors.hpp"
#include "acflow/reduce.hpp"
#include "acflow/tensor_ops.hpp"

namespace acflow {

void StepControl::validate() const {
  if (!(cfl_safety > 0.0) || cfl_safety > 1.0) {
    throw ConfigError("control.cfl_safety must lie in (0, 1]");
  }
  if (dt_override && !(*dt_override > 0.0)) {
    throw ConfigError("control.dt_override must be positive");
  }
  if (project_every < 0) {
    throw ConfigError("control.project_every must be >= 0");
  }
  if (t_end < 0.0) {
    throw ConfigError("control.t_end must be >= 0");
  }
  if (!(stop_tension_tol >= 0.0)) {
    throw ConfigError("control.stop_tension_tol must be >= 0");
  }
  if (!(blowup_e_factor > 1.0)) {
    throw ConfigError("control.blowup_e_factor must exceed 1");
  }
  if (!(delta_lemma32 > 0.0)) {
    throw ConfigError("control.delta_lemma32 must be positive");
  }
}

double cfl_dt(const GridSpec& grid, const MetricField& metric,
              const StepControl& ctrl) {
  const double h = grid.min_spacing();
  return ctrl.cfl_safety * h * h /
         (2.0 * GridSpec::dim * metric.max_g_inv_eigenvalue());
}

ExistenceWindow existence_window(double e_bar0, double delta) {
  if (!(e_bar0 > 0.0)) {
    throw ConfigError("existence_window requires e_bar0 > 0");
  }
  return {delta * std::atan(1.0 / (2.0 * e_bar0)),
          2.0 * e_bar0 + 1.0 / e_bar0};
}

double existence_horizon_from_grad_bound(double grad_bound, double delta) {
  return existence_window(grad_bound * grad_bound, delta).window;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::KAHLER_LIMIT: return "KAHLER_LIMIT";
    case Verdict::BLOWUP_CANDIDATE: return "BLOWUP_CANDIDATE";
    default: return "TIME_LIMIT";
  }
}

namespace {

void axpy(EndoField& out, const EndoField& x, double a, const EndoField& y) {
  // out = x + a * y
  out.grid = x.grid;
  out.j.resize(x.j.size());
  const std::int64_t np = std::int64_t(x.j.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    out.j[std::size_t(p)] = x.j[std::size_t(p)] + a * y.j[std::size_t(p)];
  }
}

void accumulate(EndoField& acc, double a, const EndoField& y) {
  const std::int64_t np = std::int64_t(acc.j.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    acc.j[std::size_t(p)] += a * y.j[std::size_t(p)];
  }
}

void tension_eval(const EndoField& j, const MetricField& metric,
                  FlowWorkspace& ws, EndoField& out,
                  detail::TensionStats* stats) {
  detail::covariant_derivative_into(j, metric, ws.grad);
  detail::tension_pass(j, ws.grad, metric, detail::Mode::full, out, stats);
}

}  // namespace

FlowState step(const FlowState& state, const StepControl& ctrl,
               const MetricField& metric, FlowWorkspace& ws, double dt,
               StepObservables* obs) {
  const EndoField& j = state.j;

  FlowState next;
  next.step_index = state.step_index + 1;
  next.t = state.t + dt;
  next.last_dt = dt;
  next.projections_applied = state.projections_applied;

  detail::TensionStats stats;
  detail::TensionStats* stats_ptr = obs ? &stats : nullptr;

  auto harvest = [&]() {
    if (!obs) return;
    obs->e_max = stats.e_max;
    obs->tension_sup = stats.tension_sup;
    if (obs->want_integrals) {
      const ScalarField gsq = grad_norm_sq(ws.grad, metric);
      obs->energy = integrate_scalar(gsq.v, metric);
      obs->tension_l2sq = l2_inner(ws.k, ws.k, metric);
    }
  };

  if (ctrl.scheme == Scheme::euler) {
    tension_eval(j, metric, ws, ws.k, stats_ptr);
    harvest();
    axpy(next.j, j, dt, ws.k);
  } else {
    tension_eval(j, metric, ws, ws.k, stats_ptr);  // k1
    harvest();
    ws.acc = ws.k;
    axpy(ws.stage, j, 0.5 * dt, ws.k);
    tension_eval(ws.stage, metric, ws, ws.k, nullptr);  // k2
    accumulate(ws.acc, 2.0, ws.k);
    axpy(ws.stage, j, 0.5 * dt, ws.k);
    tension_eval(ws.stage, metric, ws, ws.k, nullptr);  // k3
    accumulate(ws.acc, 2.0, ws.k);
    axpy(ws.stage, j, dt, ws.k);
    tension_eval(ws.stage, metric, ws, ws.k, nullptr);  // k4
    accumulate(ws.acc, 1.0, ws.k);
    axpy(next.j, j, dt / 6.0, ws.acc);
  }
  next.j.time = next.t;

  if (ctrl.project_every > 0 &&
      next.step_index % ctrl.project_every == 0) {
    const ConstraintResiduals r = constraint_residuals(next.j, metric);
    const double drift = std::max(r.a_max, r.b_max);
    if (!std::isfinite(drift)) {
      throw NonFiniteError("non-finite field at t=" + std::to_string(next.t));
    }
    if (drift > 0.1) {
      throw ConstraintBlowupError(drift, next.t);
    }
    next.j = project_compatible(next.j, metric);
    next.projections_applied += 1;
  }
  return next;
}

FlowState step(const FlowState& state, const StepControl& ctrl,
               const MetricField& metric) {
  FlowWorkspace ws;
  const double dt =
      ctrl.dt_override ? *ctrl.dt_override : cfl_dt(state.j.grid, metric, ctrl);
  FlowState next = step(state, ctrl, metric, ws, dt, nullptr);
  for (const Mat4& m : next.j.j) {
    if (!m.allFinite()) {
      throw NonFiniteError("non-finite field at t=" + std::to_string(next.t));
    }
  }
  return next;
}

}  // namespace acflow
