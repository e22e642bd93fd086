#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "spnsched/arrivals.hpp"
#include "spnsched/experiments.hpp"
#include "spnsched/policies.hpp"
#include "spnsched/scheduling_set.hpp"

namespace spn::io {

using nlohmann::json;

/// Parses a JSON file; missing files and syntax errors become ConfigError.
json read_json_file(const std::filesystem::path& path);

// {"kind":"finite","elements":[[..],..]} or {"kind":"polytope","vertices":[[..],..]}, optional "n".
SchedulingSet parse_set(const json& j);
json to_json(const SchedulingSet& set);

// {"variant":"deterministic","rows":[[..]]} (or "rate":[..], or "csv":"path"; optional "slot0"),
// {"variant":"dependent_binary"|"independent_binary","lambda":[..],"K":k},
// {"variant":"binomial","lambda":[..],"variance":v},
// {"variant":"scaled_bernoulli","lambda":[..],"variance":[..]}.
// Relative CSV paths resolve against `base_dir`.
ArrivalSpec parse_arrivals(const json& j, const std::filesystem::path& base_dir = {});

// {"variant":"maxweight"|"lyapopt"|"random_vertex"|"fixed","index":i,"max_iterations":k,"tolerance":x}
// or a bare string.
PolicySpec parse_policy(const json& j);
json to_json(const PolicySpec& p);

/// Reads a CSV of nonnegative reals, one row per slot; a non-numeric first line is a header.
std::vector<Vec> read_rows_csv(const std::filesystem::path& path);

json to_json(const GapConfig& c);
json to_json(const Table1Config& c);
json to_json(const TrajectoryConfig& c);
json to_json(const CltConfig& c);

/// Overwrites fields present in `j`, rejecting unknown keys.
void update_from_json(GapConfig& c, const json& j);
void update_from_json(Table1Config& c, const json& j);
void update_from_json(TrajectoryConfig& c, const json& j);
void update_from_json(CltConfig& c, const json& j);

json to_json(const BoundValue& b);

/// Base of every summary.json: study, version, seed, effective config and its digest.
json summary_header(const std::string& study, const json& config);

/// Writes `j` (indent 2, trailing newline).
void write_json_file(const std::filesystem::path& path, const json& j);

/// Each writer creates `dir` and emits stats.csv (plus study-specific CSVs) and summary.json.
json write_gap_outputs(const std::filesystem::path& dir, const GapConfig& cfg, const GapResult& res);
json write_table1_outputs(const std::filesystem::path& dir, const Table1Config& cfg, const Table1Result& res);
json write_trajectory_outputs(const std::filesystem::path& dir, const TrajectoryConfig& cfg,
                              const TrajectoryResult& res);
json write_clt_outputs(const std::filesystem::path& dir, const CltConfig& cfg, const CltResult& res);

}  // namespace spn::io
