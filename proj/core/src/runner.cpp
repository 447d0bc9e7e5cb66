#include "acflow/runner.hpp"

#include <cmath>

#include "acflow/errors.hpp"
#include "acflow/reduce.hpp"
#include "acflow/tensor_ops.hpp"
#include "acflow/tensor_ops_detail.hpp"

namespace acflow {

namespace {

constexpr double kLemmaSlack = 0.05;  // 5% relative tolerance on the bound

// Observables computed directly from a state (used for the final record,
// where no step supplies them as by-products).
StepObservables observe(const EndoField& j, const MetricField& metric) {
  StepObservables obs;
  obs.want_integrals = true;
  GradField grad = covariant_derivative(j, metric);
  const ScalarField gsq = grad_norm_sq(grad, metric);
  obs.energy = integrate_scalar(gsq.v, metric);
  obs.e_max = 0.5 * max_of(gsq.v);
  EndoField tau;
  detail::tension_pass(j, grad, metric, detail::Mode::full, tau, nullptr);
  obs.tension_sup = sup_norm_g(tau, metric);
  obs.tension_l2sq = l2_inner(tau, tau, metric);
  return obs;
}

}  // namespace

RunResult run(const RunConfig& cfg, const RunCallbacks& cb) {
  cfg.validate();
  const MetricField metric = build_metric(cfg);
  EndoField j0 = build_initial(cfg, metric);
  const StepControl& ctrl = cfg.control;

  FlowState state;
  state.j = std::move(j0);

  const double dt_nominal =
      ctrl.dt_override ? *ctrl.dt_override : cfl_dt(cfg.grid, metric, ctrl);
  const double t_eps = 1e-12 * std::max(1.0, ctrl.t_end);

  RunResult res;
  FlowWorkspace ws;

  auto push_record = [&](const FlowState& s, const StepObservables& obs,
                         double dt) {
    const ConstraintResiduals cr = constraint_residuals(s.j, metric);
    DiagnosticsRecord r;
    r.t = s.t;
    r.energy = obs.energy;
    r.e_max = obs.e_max;
    r.a_max = cr.a_max;
    r.b_max = cr.b_max;
    r.tension_linf = obs.tension_sup;
    r.dissipation_rhs = -2.0 * obs.tension_l2sq;
    r.dt = dt;
    res.records.push_back(r);
  };

  if (cb.on_snapshot) cb.on_snapshot(state);
  long last_snapshot_step = 0;

  bool have_window = false;
  Lemma32Window window;
  bool done = false;

  while (!done) {
    if (state.t >= ctrl.t_end - t_eps) {
      res.verdict = Verdict::TIME_LIMIT;
      res.reason = "time_limit";
      break;
    }
    const double dt = std::min(dt_nominal, ctrl.t_end - state.t);
    const bool record_due = state.step_index % cfg.output.record_every == 0;

    StepObservables obs;
    obs.want_integrals = record_due;

    FlowState next;
    try {
      next = step(state, ctrl, metric, ws, dt, &obs);
    } catch (const ConstraintBlowupError&) {
      res.verdict = Verdict::BLOWUP_CANDIDATE;
      res.reason = "constraint_drift";
      res.t_signal = state.t + dt;
      done = true;
    } catch (const NonFiniteError&) {
      res.verdict = Verdict::BLOWUP_CANDIDATE;
      res.reason = "nonfinite";
      res.t_signal = state.t + dt;
      done = true;
    }

    // monitors evaluate the state the step departed from
    if (state.step_index == 0) res.e_bar0 = obs.e_max;

    if (!std::isfinite(obs.e_max) || !std::isfinite(obs.tension_sup)) {
      res.verdict = Verdict::BLOWUP_CANDIDATE;
      res.reason = "nonfinite";
      res.t_signal = state.t;
      done = true;
    }

    if (record_due) push_record(state, obs, dt);

    if (done) break;

    if (obs.tension_sup < ctrl.stop_tension_tol &&
        obs.e_max < ctrl.stop_tension_tol) {
      res.verdict = Verdict::KAHLER_LIMIT;
      res.reason = "converged";
      break;
    }
    if (res.e_bar0 > 0.0 && obs.e_max >= ctrl.blowup_e_factor * res.e_bar0) {
      res.verdict = Verdict::BLOWUP_CANDIDATE;
      res.reason = "e_factor";
      res.t_signal = state.t;
      break;
    }

    if (obs.e_max > 0.0) {
      if (!have_window || state.t > window.t0 + window.window) {
        const ExistenceWindow w =
            existence_window(obs.e_max, ctrl.delta_lemma32);
        window = {state.t, obs.e_max, w.window, w.e_bound};
        res.windows.push_back(window);
        have_window = true;
      } else if (obs.e_max > window.bound * (1.0 + kLemmaSlack)) {
        res.verdict = Verdict::BLOWUP_CANDIDATE;
        res.reason = "lemma32";
        res.t_signal = state.t;
        break;
      }
    }

    state = std::move(next);
    if (cfg.output.snapshot_every > 0 && cb.on_snapshot &&
        state.step_index % cfg.output.snapshot_every == 0) {
      cb.on_snapshot(state);
      last_snapshot_step = state.step_index;
    }
  }

  // final record at the state the run ended on
  if (res.records.empty() || res.records.back().t < state.t - t_eps) {
    push_record(state, observe(state.j, metric), state.last_dt);
  }
  if (cb.on_snapshot && state.step_index != last_snapshot_step) {
    cb.on_snapshot(state);
  }

  // centered dissipation lhs over the record times, one-sided at the ends
  auto& rec = res.records;
  const std::size_t n = rec.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = (i == 0) ? 0 : i - 1;
    const std::size_t hi = (i + 1 == n) ? i : i + 1;
    const double span = rec[hi].t - rec[lo].t;
    rec[i].dissipation_lhs =
        span > 0.0 ? (rec[hi].energy - rec[lo].energy) / span : 0.0;
  }

  res.final_state = std::move(state);
  return res;
}

}  // namespace acflow
