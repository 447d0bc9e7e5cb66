#include "acflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "acflow/errors.hpp"
#include "acflow/s2_reduction.hpp"

namespace acflow {

using json = nlohmann::json;

namespace {

// SAX shim over the DOM builder that rejects duplicate object keys.
class DupCheckingSax : public nlohmann::detail::json_sax_dom_parser<json> {
 public:
  explicit DupCheckingSax(json& j)
      : nlohmann::detail::json_sax_dom_parser<json>(j, true) {}

  bool start_object(std::size_t elements) {
    scopes_.emplace_back();
    return nlohmann::detail::json_sax_dom_parser<json>::start_object(elements);
  }
  bool end_object() {
    scopes_.pop_back();
    return nlohmann::detail::json_sax_dom_parser<json>::end_object();
  }
  bool key(json::string_t& val) {
    if (!scopes_.back().insert(val).second) {
      throw ConfigError("duplicate key \"" + val + "\" in config");
    }
    return nlohmann::detail::json_sax_dom_parser<json>::key(val);
  }

 private:
  std::vector<std::set<std::string>> scopes_;
};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void expect_keys(const json& obj, const std::string& path,
                 std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      fail(path, "unknown key \"" + key + "\"");
    }
  }
}

double get_number(const json& obj, const std::string& path) {
  if (!obj.is_number()) fail(path, "expected a number");
  return obj.get<double>();
}

int get_int(const json& obj, const std::string& path) {
  if (!obj.is_number_integer()) fail(path, "expected an integer");
  return obj.get<int>();
}

std::uint64_t get_seed(const json& obj, const std::string& path) {
  if (!obj.is_number_unsigned() && !obj.is_number_integer()) {
    fail(path, "expected an integer seed");
  }
  return obj.get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& path) {
  if (!obj.is_string()) fail(path, "expected a string");
  return obj.get<std::string>();
}

template <class T, class Get>
std::array<T, 4> get_per_axis(const json& obj, const std::string& path,
                              Get&& get) {
  std::array<T, 4> out;
  if (obj.is_array()) {
    if (obj.size() != 4) fail(path, "expected 4 entries");
    for (int a = 0; a < 4; ++a) {
      out[std::size_t(a)] = get(obj[std::size_t(a)], path);
    }
  } else {
    const T v = get(obj, path);
    out.fill(v);
  }
  return out;
}

GridSpec parse_grid(const json& obj) {
  if (!obj.is_object()) fail("grid", "expected an object");
  expect_keys(obj, "grid", {"dim", "n", "length", "thin_axes"});
  GridSpec g;
  if (obj.contains("dim") && get_int(obj["dim"], "grid.dim") != 4) {
    fail("grid.dim", "only dim = 4 is supported");
  }
  if (!obj.contains("n")) fail("grid.n", "required");
  g.n = get_per_axis<int>(obj["n"], "grid.n", get_int);
  if (obj.contains("length")) {
    g.length = get_per_axis<double>(obj["length"], "grid.length", get_number);
  }
  if (obj.contains("thin_axes")) {
    if (!obj["thin_axes"].is_array()) fail("grid.thin_axes", "expected an array");
    for (const auto& e : obj["thin_axes"]) {
      const int a = get_int(e, "grid.thin_axes");
      if (a < 0 || a > 3) fail("grid.thin_axes", "axis out of range");
      g.thin[std::size_t(a)] = true;
    }
  }
  return g;
}

MetricConfig parse_metric(const json& obj) {
  if (!obj.is_object()) fail("metric", "expected an object");
  expect_keys(obj, "metric", {"tag", "amplitude", "seed"});
  MetricConfig m;
  const std::string tag =
      obj.contains("tag") ? get_string(obj["tag"], "metric.tag") : "flat";
  if (tag == "flat") {
    m.tag = MetricTag::flat;
    if (obj.contains("amplitude") || obj.contains("seed")) {
      fail("metric", "flat metric takes no amplitude/seed");
    }
  } else if (tag == "perturbed") {
    m.tag = MetricTag::perturbed;
    if (!obj.contains("amplitude")) fail("metric.amplitude", "required");
    m.amplitude = get_number(obj["amplitude"], "metric.amplitude");
    m.seed = obj.contains("seed") ? get_seed(obj["seed"], "metric.seed") : 0;
  } else {
    fail("metric.tag", "expected \"flat\" or \"perturbed\"");
  }
  return m;
}

InitialConfig parse_initial(const json& obj) {
  if (!obj.is_object()) fail("initial", "expected an object");
  InitialConfig ic;
  if (!obj.contains("kind")) fail("initial.kind", "required");
  const std::string kind = get_string(obj["kind"], "initial.kind");
  if (kind == "kahler") {
    ic.kind = InitialKind::kahler;
    expect_keys(obj, "initial", {"kind"});
  } else if (kind == "perturbation") {
    ic.kind = InitialKind::perturbation;
    expect_keys(obj, "initial", {"kind", "amplitude", "seed", "max_abs_mode"});
    if (!obj.contains("amplitude")) fail("initial.amplitude", "required");
    ic.perturbation.amplitude =
        get_number(obj["amplitude"], "initial.amplitude");
    if (obj.contains("seed")) {
      ic.perturbation.seed = get_seed(obj["seed"], "initial.seed");
    }
    if (obj.contains("max_abs_mode")) {
      ic.perturbation.max_abs_mode =
          get_int(obj["max_abs_mode"], "initial.max_abs_mode");
      if (ic.perturbation.max_abs_mode < 1) {
        fail("initial.max_abs_mode", "must be >= 1");
      }
    }
  } else if (kind == "bubble") {
    ic.kind = InitialKind::bubble;
    expect_keys(obj, "initial",
                {"kind", "center", "r0", "r", "smoothing_width"});
    if (obj.contains("center")) {
      if (!obj["center"].is_array() || obj["center"].size() != 4) {
        fail("initial.bubble.center", "expected 4 coordinates");
      }
      for (int a = 0; a < 4; ++a) {
        ic.bubble.center[std::size_t(a)] =
            get_number(obj["center"][std::size_t(a)], "initial.bubble.center");
      }
    }
    if (!obj.contains("r0")) fail("initial.bubble.r0", "required");
    ic.bubble.r0 = get_number(obj["r0"], "initial.bubble.r0");
    ic.bubble.r =
        obj.contains("r") ? get_number(obj["r"], "initial.bubble.r") : ic.bubble.r0;
    if (obj.contains("smoothing_width")) {
      ic.bubble.smoothing_width =
          get_number(obj["smoothing_width"], "initial.bubble.smoothing_width");
    }
  } else {
    fail("initial.kind", "expected kahler, perturbation or bubble");
  }
  return ic;
}

StepControl parse_control(const json& obj) {
  if (!obj.is_object()) fail("control", "expected an object");
  expect_keys(obj, "control",
              {"scheme", "cfl_safety", "dt_override", "project_every", "t_end",
               "stop_tension_tol", "blowup_e_factor", "delta_lemma32"});
  StepControl c;
  if (obj.contains("scheme")) {
    const std::string s = get_string(obj["scheme"], "control.scheme");
    if (s == "euler") {
      c.scheme = Scheme::euler;
    } else if (s == "rk4") {
      c.scheme = Scheme::rk4;
    } else {
      fail("control.scheme", "expected \"euler\" or \"rk4\"");
    }
  }
  if (obj.contains("cfl_safety")) {
    c.cfl_safety = get_number(obj["cfl_safety"], "control.cfl_safety");
  }
  if (obj.contains("dt_override") && !obj["dt_override"].is_null()) {
    c.dt_override = get_number(obj["dt_override"], "control.dt_override");
  }
  if (obj.contains("project_every")) {
    c.project_every = get_int(obj["project_every"], "control.project_every");
  }
  if (!obj.contains("t_end")) fail("control.t_end", "required");
  c.t_end = get_number(obj["t_end"], "control.t_end");
  if (obj.contains("stop_tension_tol")) {
    c.stop_tension_tol =
        get_number(obj["stop_tension_tol"], "control.stop_tension_tol");
  }
  if (obj.contains("blowup_e_factor")) {
    c.blowup_e_factor =
        get_number(obj["blowup_e_factor"], "control.blowup_e_factor");
  }
  if (obj.contains("delta_lemma32")) {
    c.delta_lemma32 =
        get_number(obj["delta_lemma32"], "control.delta_lemma32");
  }
  return c;
}

ProbeConfig parse_probe(const json& obj, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  expect_keys(obj, path, {"x0", "T0", "rho_cut", "N_weight", "R_list"});
  ProbeConfig p;
  if (!obj.contains("x0")) fail(path + ".x0", "required");
  if (!obj["x0"].is_array() || obj["x0"].size() != 4) {
    fail(path + ".x0", "expected 4 coordinates");
  }
  for (int a = 0; a < 4; ++a) {
    p.x0[std::size_t(a)] = get_number(obj["x0"][std::size_t(a)], path + ".x0");
  }
  if (!obj.contains("T0")) fail(path + ".T0", "required");
  p.t0 = get_number(obj["T0"], path + ".T0");
  if (obj.contains("rho_cut")) {
    p.rho_cut = get_number(obj["rho_cut"], path + ".rho_cut");
  }
  if (obj.contains("N_weight")) {
    p.n_weight = get_number(obj["N_weight"], path + ".N_weight");
  }
  if (obj.contains("R_list")) {
    if (!obj["R_list"].is_array()) fail(path + ".R_list", "expected an array");
    for (const auto& e : obj["R_list"]) {
      p.r_list.push_back(get_number(e, path + ".R_list"));
    }
  }
  return p;
}

OutputConfig parse_output(const json& obj) {
  if (!obj.is_object()) fail("output", "expected an object");
  expect_keys(obj, "output", {"snapshot_every", "record_every", "out_dir"});
  OutputConfig o;
  if (obj.contains("snapshot_every")) {
    o.snapshot_every = get_int(obj["snapshot_every"], "output.snapshot_every");
  }
  if (obj.contains("record_every")) {
    o.record_every = get_int(obj["record_every"], "output.record_every");
  }
  if (obj.contains("out_dir")) {
    o.out_dir = get_string(obj["out_dir"], "output.out_dir");
  }
  return o;
}

}  // namespace

void ProbeConfig::validate(const GridSpec& grid,
                           const std::string& path) const {
  const double min_len =
      *std::min_element(grid.length.begin(), grid.length.end());
  if (!(t0 > 0.0)) fail(path + ".T0", "must be positive");
  if (!(rho_cut > 0.0) || rho_cut > min_len / 4.0) {
    fail(path + ".rho_cut", "must lie in (0, min length / 4]");
  }
  if (!(n_weight > 1.0)) fail(path + ".N_weight", "must exceed 1");
  const double rmax = std::min(std::sqrt(t0) / 2.0, 1.0);
  for (double r : r_list) {
    if (!(r > 0.0) || r > rmax) {
      fail(path + ".R_list",
           "entries must lie in (0, min(sqrt(T0)/2, 1)]");
    }
  }
}

void RunConfig::validate() const {
  grid.validate();
  control.validate();
  if (metric.tag == MetricTag::perturbed &&
      (metric.amplitude < 0.0 || metric.amplitude >= 0.2)) {
    throw ConfigError("metric.amplitude must lie in [0, 0.2)");
  }
  if (initial.kind == InitialKind::perturbation) {
    const double a = initial.perturbation.amplitude;
    if (a < 0.0 || a >= 0.3) {
      throw ConfigError("initial.amplitude must lie in [0, 0.3)");
    }
  }
  if (initial.kind == InitialKind::bubble) {
    initial.bubble.validate(grid);
  }
  for (std::size_t i = 0; i < probes.size(); ++i) {
    probes[i].validate(grid, "probes[" + std::to_string(i) + "]");
  }
  if (output.record_every < 1) {
    throw ConfigError("output.record_every must be >= 1");
  }
  if (output.snapshot_every < 0) {
    throw ConfigError("output.snapshot_every must be >= 0");
  }
}

RunConfig parse_config(const std::string& text) {
  json doc;
  DupCheckingSax sax(doc);
  if (!json::sax_parse(text, &sax)) {
    throw ConfigError("config is not valid JSON");
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  expect_keys(doc, "config",
              {"grid", "metric", "initial", "control", "probes", "output"});

  RunConfig cfg;
  if (!doc.contains("grid")) fail("grid", "required");
  cfg.grid = parse_grid(doc["grid"]);
  if (doc.contains("metric")) cfg.metric = parse_metric(doc["metric"]);
  if (!doc.contains("initial")) fail("initial", "required");
  cfg.initial = parse_initial(doc["initial"]);
  if (!doc.contains("control")) fail("control", "required");
  cfg.control = parse_control(doc["control"]);
  if (doc.contains("probes")) {
    if (!doc["probes"].is_array()) fail("probes", "expected an array");
    for (std::size_t i = 0; i < doc["probes"].size(); ++i) {
      cfg.probes.push_back(
          parse_probe(doc["probes"][i], "probes[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("output")) cfg.output = parse_output(doc["output"]);

  cfg.validate();
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  json doc;
  json grid;
  grid["dim"] = 4;
  grid["n"] = cfg.grid.n;
  grid["length"] = cfg.grid.length;
  json thin = json::array();
  for (int a = 0; a < 4; ++a) {
    if (cfg.grid.thin[std::size_t(a)]) thin.push_back(a);
  }
  grid["thin_axes"] = thin;
  doc["grid"] = grid;

  json metric;
  metric["tag"] = cfg.metric.tag == MetricTag::flat ? "flat" : "perturbed";
  if (cfg.metric.tag == MetricTag::perturbed) {
    metric["amplitude"] = cfg.metric.amplitude;
    metric["seed"] = cfg.metric.seed;
  }
  doc["metric"] = metric;

  json initial;
  switch (cfg.initial.kind) {
    case InitialKind::kahler:
      initial["kind"] = "kahler";
      break;
    case InitialKind::perturbation:
      initial["kind"] = "perturbation";
      initial["amplitude"] = cfg.initial.perturbation.amplitude;
      initial["seed"] = cfg.initial.perturbation.seed;
      initial["max_abs_mode"] = cfg.initial.perturbation.max_abs_mode;
      break;
    case InitialKind::bubble:
      initial["kind"] = "bubble";
      initial["center"] = cfg.initial.bubble.center;
      initial["r0"] = cfg.initial.bubble.r0;
      initial["r"] = cfg.initial.bubble.r;
      initial["smoothing_width"] = cfg.initial.bubble.smoothing_width;
      break;
  }
  doc["initial"] = initial;

  json control;
  control["scheme"] = cfg.control.scheme == Scheme::euler ? "euler" : "rk4";
  control["cfl_safety"] = cfg.control.cfl_safety;
  if (cfg.control.dt_override) {
    control["dt_override"] = *cfg.control.dt_override;
  } else {
    control["dt_override"] = nullptr;
  }
  control["project_every"] = cfg.control.project_every;
  control["t_end"] = cfg.control.t_end;
  control["stop_tension_tol"] = cfg.control.stop_tension_tol;
  control["blowup_e_factor"] = cfg.control.blowup_e_factor;
  control["delta_lemma32"] = cfg.control.delta_lemma32;
  doc["control"] = control;

  json probes = json::array();
  for (const auto& p : cfg.probes) {
    json pj;
    pj["x0"] = p.x0;
    pj["T0"] = p.t0;
    pj["rho_cut"] = p.rho_cut;
    pj["N_weight"] = p.n_weight;
    pj["R_list"] = p.r_list;
    probes.push_back(pj);
  }
  doc["probes"] = probes;

  json output;
  output["snapshot_every"] = cfg.output.snapshot_every;
  output["record_every"] = cfg.output.record_every;
  output["out_dir"] = cfg.output.out_dir;
  doc["output"] = output;

  return doc.dump(2);
}

std::string config_hash(const RunConfig& cfg) {
  const std::string s = serialize_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

MetricField build_metric(const RunConfig& cfg) {
  if (cfg.metric.tag == MetricTag::flat) return build_flat_metric(cfg.grid);
  return build_perturbed_metric(cfg.grid, cfg.metric.amplitude,
                                cfg.metric.seed);
}

EndoField build_initial(const RunConfig& cfg, const MetricField& metric) {
  switch (cfg.initial.kind) {
    case InitialKind::kahler:
      return kahler_standard(cfg.grid);
    case InitialKind::perturbation:
      return random_perturbation(kahler_standard(cfg.grid),
                                 cfg.initial.perturbation.amplitude,
                                 cfg.initial.perturbation.seed, metric,
                                 cfg.initial.perturbation.max_abs_mode);
    default: {
      const SphereField u = rescale_bubble(cfg.grid, cfg.initial.bubble);
      EndoField j = j_from_u(u);
      return j;
    }
  }
}

}  // namespace acflow
