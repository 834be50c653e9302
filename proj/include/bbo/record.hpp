#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbo/metrics.hpp"

namespace bbo {

struct TrialFlags {
    bool clamped = false;
    bool fallback = false;
    bool injected = false;
};

/// One (task, method, seed) cell: the full trajectory, per-trial flags, raw
/// model text where applicable, derived metrics and the config snapshot that
/// reproduces the cell. The persistence unit (one JSONL line).
struct RunRecord {
    std::string task_id;
    std::string family;
    std::string method;
    std::uint64_t seed = 0;      // seed value from the config's seed list
    std::uint64_t cell_seed = 0; // derived stream seed for this cell
    int budget = 0;
    std::string backend_name;

    std::vector<std::vector<double>> points;
    std::vector<double> losses;
    std::vector<TrialFlags> flags;

    nlohmann::json raw_texts;      // method-shaped audit trail of raw replies
    std::vector<double> entropy_series; // per-generation proposal entropy (cma/centaur)
    MetricSummary metrics;
    nlohmann::json config_snapshot;
    nlohmann::json extra;          // method specifics (tree dump, ...)

    long long wall_ms = 0;         // 0 in deterministic modes
    bool failed = false;
    std::string error;
};

nlohmann::json run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);

std::string run_record_to_line(const RunRecord& record);
std::vector<RunRecord> load_records(const std::string& path);

/// Re-derives metrics from the stored trajectory (self-description check).
MetricSummary rederive_metrics(const RunRecord& record, const Bounds& bounds);

} // namespace bbo
