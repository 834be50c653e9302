#include "bbo/record.hpp"

#include <fstream>

#include "bbo/errors.hpp"

namespace bbo {

using nlohmann::json;

nlohmann::json run_record_to_json(const RunRecord& r) {
    json j;
    j["schema"] = "bbo.run.v1";
    j["task"] = r.task_id;
    j["family"] = r.family;
    j["method"] = r.method;
    j["seed"] = r.seed;
    j["cell_seed"] = r.cell_seed;
    j["budget"] = r.budget;
    j["backend"] = r.backend_name;
    j["points"] = r.points;
    j["losses"] = r.losses;
    json clamped = json::array(), fallback = json::array(), injected = json::array();
    for (const auto& f : r.flags) {
        clamped.push_back(f.clamped);
        fallback.push_back(f.fallback);
        injected.push_back(f.injected);
    }
    j["clamped"] = clamped;
    j["fallback"] = fallback;
    j["injected"] = injected;
    j["raw_texts"] = r.raw_texts;
    j["entropy"] = r.entropy_series;

    json m;
    m["best_step"] = r.metrics.best_step;
    m["best_loss"] = r.metrics.best_loss;
    json series = json::array();
    for (const auto& [k, cov] : r.metrics.coverage_series) series.push_back({k, cov});
    m["coverage_series"] = series;
    if (r.metrics.norm_traj_length)
        m["L"] = *r.metrics.norm_traj_length;
    else
        m["L"] = nullptr;
    m["clamped_count"] = r.metrics.clamped_count;
    m["fallback_count"] = r.metrics.fallback_count;
    j["metrics"] = m;

    j["config"] = r.config_snapshot;
    j["extra"] = r.extra;
    j["wall_ms"] = r.wall_ms;
    j["failed"] = r.failed;
    j["error"] = r.error;
    return j;
}

RunRecord run_record_from_json(const nlohmann::json& j) {
    RunRecord r;
    r.task_id = j.at("task").get<std::string>();
    r.family = j.at("family").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.cell_seed = j.at("cell_seed").get<std::uint64_t>();
    r.budget = j.at("budget").get<int>();
    r.backend_name = j.at("backend").get<std::string>();
    r.points = j.at("points").get<std::vector<std::vector<double>>>();
    r.losses = j.at("losses").get<std::vector<double>>();
    const auto clamped = j.at("clamped").get<std::vector<bool>>();
    const auto fallback = j.at("fallback").get<std::vector<bool>>();
    const auto injected = j.at("injected").get<std::vector<bool>>();
    for (std::size_t i = 0; i < clamped.size(); ++i)
        r.flags.push_back({clamped[i], fallback[i], injected[i]});
    r.raw_texts = j.at("raw_texts");
    r.entropy_series = j.at("entropy").get<std::vector<double>>();

    const auto& m = j.at("metrics");
    r.metrics.best_step = m.at("best_step").get<int>();
    r.metrics.best_loss = m.at("best_loss").get<double>();
    for (const auto& entry : m.at("coverage_series"))
        r.metrics.coverage_series.emplace_back(entry[0].get<int>(), entry[1].get<double>());
    if (!m.at("L").is_null()) r.metrics.norm_traj_length = m.at("L").get<double>();
    r.metrics.clamped_count = m.at("clamped_count").get<int>();
    r.metrics.fallback_count = m.at("fallback_count").get<int>();

    r.config_snapshot = j.at("config");
    r.extra = j.at("extra");
    r.wall_ms = j.at("wall_ms").get<long long>();
    r.failed = j.at("failed").get<bool>();
    r.error = j.at("error").get<std::string>();
    return r;
}

std::string run_record_to_line(const RunRecord& record) {
    return run_record_to_json(record).dump();
}

std::vector<RunRecord> load_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_records: cannot open " + path);
    std::vector<RunRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(run_record_from_json(json::parse(line)));
    }
    return records;
}

MetricSummary rederive_metrics(const RunRecord& record, const Bounds& bounds) {
    Trajectory traj{record.points, record.losses, bounds};
    int clamped = 0, fallback = 0;
    for (const auto& f : record.flags) {
        clamped += f.clamped ? 1 : 0;
        fallback += f.fallback ? 1 : 0;
    }
    return summarize(traj, clamped, fallback);
}

} // namespace bbo
