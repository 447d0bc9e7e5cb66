#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "acflow/config.hpp"
#include "acflow/flow.hpp"
#include "acflow/records.hpp"

namespace acflow {

/// records.csv with the fixed column set
/// t,E,e_max,A_max,B_max,tension_linf,dissipation_lhs,dissipation_rhs,dt
/// and 17 significant digits throughout.
void write_records_csv(const std::filesystem::path& path,
                       std::span<const DiagnosticsRecord> records);

std::vector<DiagnosticsRecord> read_records_csv(
    const std::filesystem::path& path);

/// verdict.json: verdict, reason, signal time, the final record, the
/// doubling-window history and the resolved config hash.
void write_verdict_json(const std::filesystem::path& path,
                        const RunResult& result, const std::string& cfg_hash);

std::string format_g17(double v);

}  // namespace acflow
