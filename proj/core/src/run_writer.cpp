#include "acflow/run_writer.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "acflow/errors.hpp"

namespace acflow {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_records_csv(const std::filesystem::path& path,
                       std::span<const DiagnosticsRecord> records) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw SnapshotError("cannot open " + path.string() + " for writing");
  os << "t,E,e_max,A_max,B_max,tension_linf,dissipation_lhs,dissipation_rhs,dt\n";
  for (const auto& r : records) {
    os << format_g17(r.t) << ',' << format_g17(r.energy) << ','
       << format_g17(r.e_max) << ',' << format_g17(r.a_max) << ','
       << format_g17(r.b_max) << ',' << format_g17(r.tension_linf) << ','
       << format_g17(r.dissipation_lhs) << ','
       << format_g17(r.dissipation_rhs) << ',' << format_g17(r.dt) << '\n';
  }
  if (!os) throw SnapshotError("write failed for " + path.string());
}

std::vector<DiagnosticsRecord> read_records_csv(
    const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw SnapshotError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) {
    throw SnapshotError("empty records file " + path.string());
  }
  std::vector<DiagnosticsRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    double v[9];
    for (int i = 0; i < 9; ++i) {
      if (!std::getline(ls, cell, ',')) {
        throw SnapshotError("malformed records row in " + path.string());
      }
      v[i] = std::strtod(cell.c_str(), nullptr);
    }
    DiagnosticsRecord r;
    r.t = v[0];
    r.energy = v[1];
    r.e_max = v[2];
    r.a_max = v[3];
    r.b_max = v[4];
    r.tension_linf = v[5];
    r.dissipation_lhs = v[6];
    r.dissipation_rhs = v[7];
    r.dt = v[8];
    out.push_back(r);
  }
  return out;
}

void write_verdict_json(const std::filesystem::path& path,
                        const RunResult& result, const std::string& cfg_hash) {
  nlohmann::json doc;
  doc["verdict"] = to_string(result.verdict);
  doc["reason"] = result.reason;
  doc["t_signal"] = result.t_signal;
  doc["e_bar0"] = result.e_bar0;
  doc["config_hash"] = cfg_hash;

  if (!result.records.empty()) {
    const auto& r = result.records.back();
    nlohmann::json fin;
    fin["t"] = r.t;
    fin["E"] = r.energy;
    fin["e_max"] = r.e_max;
    fin["A_max"] = r.a_max;
    fin["B_max"] = r.b_max;
    fin["tension_linf"] = r.tension_linf;
    fin["dissipation_lhs"] = r.dissipation_lhs;
    fin["dissipation_rhs"] = r.dissipation_rhs;
    fin["dt"] = r.dt;
    doc["final_record"] = fin;
  }

  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : result.windows) {
    nlohmann::json wj;
    wj["t0"] = w.t0;
    wj["e_bar0"] = w.e_bar0;
    wj["window"] = w.window;
    wj["bound"] = w.bound;
    windows.push_back(wj);
  }
  doc["lemma32_windows"] = windows;

  std::ofstream os(path, std::ios::trunc);
  if (!os) throw SnapshotError("cannot open " + path.string() + " for writing");
  os << doc.dump(2) << '\n';
  if (!os) throw SnapshotError("write failed for " + path.string());
}

}  // namespace acflow
