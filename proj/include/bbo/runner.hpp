#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbo/backend.hpp"
#include "bbo/mcts.hpp"
#include "bbo/record.hpp"
#include "bbo/task.hpp"

namespace bbo {

struct BackendConfig {
    std::string mode = "mock"; // live | record | replay | mock
    std::string policy = "uniform_random";
    double sigma = 0.02;       // greedy_perturb noise scale
    double step = 0.01;        // linear_walker step
    std::string model = "gpt-oss-120b";
    std::string base_url;
    std::string api_key_env = "BBO_API_KEY";
    double temperature = 0.7;
    int max_tokens = 256;
    std::string cache_path;    // record: append target; replay: source
    double requests_per_second = 0.0; // 0 = unlimited (live/record only)
};

struct TaskSelector {
    std::vector<std::string> families{"functions"}; // functions|physical|bbob2d|bbob5d
    int functions_count = 100;
    int physical_count = 100;
    int bbob_count = 48;
    int bbob_instances = 3;
    std::uint64_t task_seed = 7;
    std::vector<std::string> ids; // optional filter on task ids
};

struct RunConfig {
    TaskSelector tasks;
    std::vector<std::string> methods{"llm", "cma", "centaur", "mcts"};
    int budget = 50;
    std::vector<std::uint64_t> seeds{0};
    BackendConfig backend;
    int parallelism = 0; // 0 = auto: number of cells capped by the hardware
    std::string output_dir = "out";
    int mcts_k = 5;
    double mcts_c = 1.4142135623730951;
    std::uint64_t master_seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load_file(const std::string& path);
};

/// Task catalog per the selector, in deterministic order.
std::vector<TaskSpec> build_catalog(const TaskSelector& selector);

/// Auditable manifest: one TSV row per task (id, family, dim, bounds, seed,
/// optimum loss).
std::string catalog_manifest(const std::vector<TaskSpec>& tasks);

/// Per-cell stream seed; hashing makes execution order irrelevant.
std::uint64_t derive_cell_seed(std::uint64_t master_seed, const std::string& task_id,
                               const std::string& method, std::uint64_t seed);

/// Scripted mock backend for one cell, seeded from the cell stream so cells
/// stay independent under any parallelism.
std::shared_ptr<Backend> make_mock_backend(const BackendConfig& config, std::uint64_t cell_seed);

/// Backend per the config: live (optionally rate-limited), recording wrapper,
/// replay cache, or a seeded mock.
std::shared_ptr<Backend> make_configured_backend(const RunConfig& config, std::uint64_t seed);

/// One (task, method, seed) cell. The evaluation budget is enforced with an
/// instrumented counter; a mismatch is an internal error.
RunRecord run_single(const TaskSpec& task, const std::string& method, std::uint64_t seed,
                     std::uint64_t cell_seed, Backend& backend, const RunConfig& config);

struct ExperimentResult {
    std::vector<RunRecord> records;
    bool all_ok = true;
    std::string records_path;
};

/// Runs every (task, method, seed) cell, streaming completed records to
/// <output_dir>/records.jsonl in deterministic cell order. Failed cells are
/// recorded as failed without aborting the batch.
ExperimentResult run_experiment(const RunConfig& config);

/// Table 1-style aggregate (per backend x family: pairwise win counts against
/// the plain proposer, mean best step, mean final coverage, mean L) plus the
/// per-step coverage dynamics table. Throws ContractViolation when methods
/// cover different (task, seed) cells.
void emit_tables(const std::vector<RunRecord>& records, const std::string& out_dir);

/// Per-run 2D trace files for external plotting; non-2D records are skipped
/// with a notice.
void emit_traces(const std::vector<RunRecord>& records, const std::string& out_dir);

} // namespace bbo
