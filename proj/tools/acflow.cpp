// Command-line driver: make-initial, run, diagnose, reduce-check.
//
// Exit codes: 0 success, 1 config error, 2 numerical failure (non-finite
// values outside the monitored flow; a run that *detects* blow-up writes its
// verdict and exits 0), 3 I/O error.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "acflow/config.hpp"
#include "acflow/diagnostics.hpp"
#include "acflow/errors.hpp"
#include "acflow/run_writer.hpp"
#include "acflow/runner.hpp"
#include "acflow/s2_reduction.hpp"
#include "acflow/snapshot.hpp"
#include "acflow/tensor_ops.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace acflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SnapshotError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunConfig load_config(const std::string& path) {
  return parse_config(read_file(path));
}

std::string snapshot_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%08ld.acjf", step);
  return buf;
}

int cmd_make_initial(const std::string& config_path, const std::string& out) {
  const RunConfig cfg = load_config(config_path);
  const MetricField metric = build_metric(cfg);
  const EndoField j0 = build_initial(cfg, metric);
  for (const Mat4& m : j0.j) {
    if (!m.allFinite()) {
      throw NonFiniteError("initial data contains non-finite values");
    }
  }
  write_snapshot(j0, metric, out);
  std::cout << "wrote " << out << " (E = "
            << format_g17(energy(j0, metric)) << ")\n";
  return kExitOk;
}

int cmd_run(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  const fs::path out_dir(cfg.output.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw SnapshotError("cannot create " + out_dir.string());

  {
    std::ofstream os(out_dir / "resolved_config.json", std::ios::trunc);
    if (!os) throw SnapshotError("cannot write resolved config");
    os << serialize_config(cfg) << '\n';
  }

  const MetricField metric = build_metric(cfg);
  RunCallbacks cb;
  cb.on_snapshot = [&](const FlowState& s) {
    write_snapshot(s.j, metric, out_dir / snapshot_name(s.step_index));
  };
  const RunResult res = run(cfg, cb);

  write_records_csv(out_dir / "records.csv", res.records);
  write_verdict_json(out_dir / "verdict.json", res, config_hash(cfg));
  std::cout << "verdict: " << to_string(res.verdict) << " (" << res.reason
            << ") at t = " << format_g17(res.final_state.t) << '\n';
  return kExitOk;
}

int cmd_diagnose(const std::string& config_path, const std::string& traj,
                 double sigma, double eps0) {
  const RunConfig cfg = load_config(config_path);
  const MetricField metric = build_metric(cfg);

  std::vector<fs::path> files;
  if (fs::is_directory(traj)) {
    for (const auto& e : fs::directory_iterator(traj)) {
      if (e.path().extension() == ".acjf") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw SnapshotError("no snapshots in " + traj);
  }

  std::vector<EndoField> traj_fields;
  std::vector<double> times;
  for (const auto& f : files) {
    SnapshotData snap = read_snapshot(f);
    if (snap.grid.n != cfg.grid.n || snap.grid.length != cfg.grid.length) {
      throw SnapshotError("snapshot grid mismatch in " + f.string());
    }
    snap.field.grid = cfg.grid;  // adopt thin flags from the config
    times.push_back(snap.field.time);
    traj_fields.push_back(std::move(snap.field));
  }

  // per-snapshot scalar diagnostics
  std::vector<DiagnosticsRecord> rows(traj_fields.size());
  for (std::size_t i = 0; i < traj_fields.size(); ++i) {
    const EndoField& j = traj_fields[i];
    const GradField dj = covariant_derivative(j, metric);
    const ScalarField gsq = grad_norm_sq(dj, metric);
    const ConstraintResiduals cr = constraint_residuals(j, metric);
    EndoField tau = tension(j, metric);
    rows[i].t = j.time;
    rows[i].energy = integrate_scalar(gsq.v, metric);
    rows[i].e_max = 0.5 * max_of(gsq.v);
    rows[i].a_max = cr.a_max;
    rows[i].b_max = cr.b_max;
    rows[i].tension_linf = sup_norm_g(tau, metric);
    rows[i].dissipation_rhs =
        -kDissipationKappa * l2_inner(tau, tau, metric);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t lo = (i == 0) ? 0 : i - 1;
    const std::size_t hi = (i + 1 == rows.size()) ? i : i + 1;
    const double span = rows[hi].t - rows[lo].t;
    rows[i].dissipation_lhs =
        span > 0.0 ? (rows[hi].energy - rows[lo].energy) / span : 0.0;
  }

  const double e0 = rows.front().energy;
  std::vector<std::vector<double>> z_series(cfg.probes.size());
  for (std::size_t pi = 0; pi < cfg.probes.size(); ++pi) {
    for (const EndoField& j : traj_fields) {
      z_series[pi].push_back(j.time < cfg.probes[pi].t0
                                 ? monotonicity_Z(j, metric, cfg.probes[pi])
                                 : 0.0);
    }
  }
  std::vector<double> shi =
      shi_ratio(traj_fields, metric, 2);

  const fs::path out_dir(cfg.output.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw SnapshotError("cannot create " + out_dir.string());

  {
    std::ofstream os(out_dir / "diagnostics.csv", std::ios::trunc);
    if (!os) throw SnapshotError("cannot write diagnostics.csv");
    os << "t,E,e_max,A_max,B_max,tension_linf,dissipation_lhs,dissipation_rhs";
    for (std::size_t pi = 0; pi < cfg.probes.size(); ++pi) {
      os << ",Z_" << pi;
    }
    os << ",shi_m2\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      os << format_g17(rows[i].t) << ',' << format_g17(rows[i].energy) << ','
         << format_g17(rows[i].e_max) << ',' << format_g17(rows[i].a_max)
         << ',' << format_g17(rows[i].b_max) << ','
         << format_g17(rows[i].tension_linf) << ','
         << format_g17(rows[i].dissipation_lhs) << ','
         << format_g17(rows[i].dissipation_rhs);
      for (std::size_t pi = 0; pi < cfg.probes.size(); ++pi) {
        os << ',' << format_g17(z_series[pi][i]);
      }
      os << ',' << format_g17(shi[i]) << '\n';
    }
  }

  nlohmann::json report;
  report["config_hash"] = config_hash(cfg);
  report["e0"] = e0;
  nlohmann::json probes = nlohmann::json::array();
  for (std::size_t pi = 0; pi < cfg.probes.size(); ++pi) {
    const ProbeConfig& probe = cfg.probes[pi];
    nlohmann::json pj;
    pj["x0"] = probe.x0;
    pj["T0"] = probe.t0;
    try {
      const MonotonicityReport mr = check_monotonicity_inequality(
          times, z_series[pi], probe, e0);
      pj["z_check"] = {{"fitted_C", mr.fitted_c},
                       {"train_pairs", mr.train_pairs},
                       {"test_pairs", mr.test_pairs},
                       {"violations", mr.violations},
                       {"worst_margin", mr.worst_margin}};
    } catch (const CoverageError& e) {
      pj["z_check"] = {{"error", e.what()}};
    }
    nlohmann::json psis = nlohmann::json::array();
    std::vector<double> psi_vals;
    std::vector<double> r_ok;
    for (double r : probe.r_list) {
      nlohmann::json entry;
      entry["R"] = r;
      try {
        const double psi = monotonicity_Psi(times, z_series[pi], probe.t0, r);
        entry["Psi"] = psi;
        psi_vals.push_back(psi);
        r_ok.push_back(r);
        const EpsRegularityReport er = epsilon_regularity_probe(
            traj_fields, times, z_series[pi], metric, probe, r, sigma, eps0);
        entry["eps_probe"] = {{"Psi", er.psi},
                             {"hypothesis_met", er.hypothesis_met},
                             {"empirical_c", er.empirical_c},
                             {"sup_grad_sq", er.sup_grad_sq}};
      } catch (const CoverageError& e) {
        entry["error"] = e.what();
      }
      psis.push_back(entry);
    }
    pj["psi"] = psis;
    if (r_ok.size() >= 2) {
      const MonotonicityReport mr =
          check_monotonicity_inequality_psi(r_ok, psi_vals, probe, e0);
      pj["psi_check"] = {{"fitted_C", mr.fitted_c},
                         {"train_pairs", mr.train_pairs},
                         {"test_pairs", mr.test_pairs},
                         {"violations", mr.violations},
                         {"worst_margin", mr.worst_margin}};
    }
    probes.push_back(pj);
  }
  report["probes"] = probes;
  if (traj_fields.size() >= 3) {
    report["measured_doubling_constant"] =
        measure_doubling_constant(traj_fields, metric);
  }

  {
    std::ofstream os(out_dir / "diagnose.json", std::ios::trunc);
    if (!os) throw SnapshotError("cannot write diagnose.json");
    os << report.dump(2) << '\n';
  }
  std::cout << "diagnostics written to " << out_dir.string() << '\n';
  return kExitOk;
}

int cmd_reduce_check(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  const MetricField metric = build_metric(cfg);
  if (!metric.is_flat()) {
    throw ConfigError("reduce-check requires metric.tag = flat");
  }
  const EndoField j0 = build_initial(cfg, metric);
  const CrossValidateReport rep =
      cross_validate(j0, cfg.control.t_end, cfg.control, metric);

  const fs::path out_dir(cfg.output.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw SnapshotError("cannot create " + out_dir.string());
  {
    std::ofstream os(out_dir / "reduce.csv", std::ios::trunc);
    if (!os) throw SnapshotError("cannot write reduce.csv");
    os << "t,sup_distance\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
      os << format_g17(rep.times[i]) << ','
         << format_g17(rep.sup_distance[i]) << '\n';
    }
  }
  std::cout << "max sup-distance " << format_g17(rep.max_distance)
            << " (tol " << format_g17(rep.tol) << "): "
            << (rep.passed ? "OK" : "FAIL") << '\n';
  return rep.passed ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
  if (const char* env = std::getenv("ACFLOW_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif

  CLI::App app{"harmonic heat flow laboratory for almost complex structures"};
  app.require_subcommand(1);

  std::string config_path, out_path, traj_dir;
  double sigma = 0.5, eps0 = 0.1;

  auto* mk = app.add_subcommand("make-initial", "build initial data and write a snapshot");
  mk->add_option("--config", config_path)->required();
  mk->add_option("--out", out_path)->required();

  auto* rn = app.add_subcommand("run", "integrate the flow per the config");
  rn->add_option("--config", config_path)->required();

  auto* dg = app.add_subcommand("diagnose", "post-process a trajectory directory");
  dg->add_option("--config", config_path)->required();
  dg->add_option("--traj", traj_dir)->required();
  dg->add_option("--sigma", sigma, "cylinder shrink factor for the regularity probe");
  dg->add_option("--eps0", eps0, "smallness threshold for the regularity probe");

  auto* rc = app.add_subcommand("reduce-check", "cross-validate against the sphere flow");
  rc->add_option("--config", config_path)->required();

  try {
    app.parse(argc, argv);
    if (mk->parsed()) return cmd_make_initial(config_path, out_path);
    if (rn->parsed()) return cmd_run(config_path);
    if (dg->parsed()) return cmd_diagnose(config_path, traj_dir, sigma, eps0);
    if (rc->parsed()) return cmd_reduce_check(config_path);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NonFiniteError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const SnapshotError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const CoverageError& e) {
    std::cerr << "coverage error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
