#include "bbo/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "bbo/bbob.hpp"
#include "bbo/centaur.hpp"
#include "bbo/cma.hpp"
#include "bbo/errors.hpp"
#include "bbo/prompts.hpp"
#include "bbo/proposer.hpp"
#include "bbo/scripted.hpp"

namespace bbo {

using nlohmann::json;

// --- config -------------------------------------------------------------------

void RunConfig::validate() const {
    if (budget < 1) throw ContractViolation("config: budget must be >= 1");
    if (methods.empty()) throw ContractViolation("config: at least one method required");
    if (seeds.empty()) throw ContractViolation("config: at least one seed required");
    if (parallelism < 0) throw ContractViolation("config: parallelism must be >= 0 (0 = auto)");
    if (tasks.families.empty() && tasks.ids.empty())
        throw ContractViolation("config: at least one task family or id required");
    for (const auto& m : methods)
        if (m != "llm" && m != "cma" && m != "centaur" && m != "mcts")
            throw ContractViolation("config: unknown method " + m);
    const auto& mode = backend.mode;
    if (mode != "live" && mode != "record" && mode != "replay" && mode != "mock")
        throw ContractViolation("config: unknown backend mode " + mode);
    if ((mode == "replay" || mode == "record") && backend.cache_path.empty())
        throw ContractViolation("config: " + mode + " mode requires backend.cache_path");
    if (mode == "mock") scripted_policy_from_name(backend.policy); // validates
    if (mcts_k < 1) throw ContractViolation("config: mcts_k must be >= 1");
    if (mcts_c < 0.0) throw ContractViolation("config: mcts_c must be >= 0");
}

json RunConfig::to_json() const {
    json t;
    t["families"] = tasks.families;
    t["functions_count"] = tasks.functions_count;
    t["physical_count"] = tasks.physical_count;
    t["bbob_count"] = tasks.bbob_count;
    t["bbob_instances"] = tasks.bbob_instances;
    t["task_seed"] = tasks.task_seed;
    t["ids"] = tasks.ids;

    json b;
    b["mode"] = backend.mode;
    b["policy"] = backend.policy;
    b["sigma"] = backend.sigma;
    b["step"] = backend.step;
    b["model"] = backend.model;
    b["base_url"] = backend.base_url;
    b["api_key_env"] = backend.api_key_env;
    b["temperature"] = backend.temperature;
    b["max_tokens"] = backend.max_tokens;
    b["cache_path"] = backend.cache_path;
    b["requests_per_second"] = backend.requests_per_second;

    json j;
    j["tasks"] = t;
    j["methods"] = methods;
    j["budget"] = budget;
    j["seeds"] = seeds;
    j["backend"] = b;
    j["parallelism"] = parallelism;
    j["output_dir"] = output_dir;
    j["mcts_k"] = mcts_k;
    j["mcts_c"] = mcts_c;
    j["master_seed"] = master_seed;
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    if (j.contains("tasks")) {
        const auto& t = j.at("tasks");
        c.tasks.families = t.value("families", c.tasks.families);
        c.tasks.functions_count = t.value("functions_count", c.tasks.functions_count);
        c.tasks.physical_count = t.value("physical_count", c.tasks.physical_count);
        c.tasks.bbob_count = t.value("bbob_count", c.tasks.bbob_count);
        c.tasks.bbob_instances = t.value("bbob_instances", c.tasks.bbob_instances);
        c.tasks.task_seed = t.value("task_seed", c.tasks.task_seed);
        c.tasks.ids = t.value("ids", c.tasks.ids);
    }
    c.methods = j.value("methods", c.methods);
    c.budget = j.value("budget", c.budget);
    c.seeds = j.value("seeds", c.seeds);
    if (j.contains("backend")) {
        const auto& b = j.at("backend");
        c.backend.mode = b.value("mode", c.backend.mode);
        c.backend.policy = b.value("policy", c.backend.policy);
        c.backend.sigma = b.value("sigma", c.backend.sigma);
        c.backend.step = b.value("step", c.backend.step);
        c.backend.model = b.value("model", c.backend.model);
        c.backend.base_url = b.value("base_url", c.backend.base_url);
        c.backend.api_key_env = b.value("api_key_env", c.backend.api_key_env);
        c.backend.temperature = b.value("temperature", c.backend.temperature);
        c.backend.max_tokens = b.value("max_tokens", c.backend.max_tokens);
        c.backend.cache_path = b.value("cache_path", c.backend.cache_path);
        c.backend.requests_per_second = b.value("requests_per_second", c.backend.requests_per_second);
    }
    c.parallelism = j.value("parallelism", c.parallelism);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.mcts_k = j.value("mcts_k", c.mcts_k);
    c.mcts_c = j.value("mcts_c", c.mcts_c);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.validate();
    return c;
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ContractViolation(std::string("config: parse error: ") + e.what());
    }
    return from_json(j);
}

// --- catalog -------------------------------------------------------------------

std::vector<TaskSpec> build_catalog(const TaskSelector& selector) {
    std::vector<TaskSpec> tasks;
    for (const auto& family : selector.families) {
        if (family == "functions") {
            auto generated = make_function_tasks(selector.functions_count, selector.task_seed);
            std::move(generated.begin(), generated.end(), std::back_inserter(tasks));
        } else if (family == "physical") {
            auto generated = make_physical_tasks(selector.physical_count, selector.task_seed);
            std::move(generated.begin(), generated.end(), std::back_inserter(tasks));
        } else if (family == "bbob2d") {
            auto generated = make_bbob_tasks(2, selector.bbob_count, selector.bbob_instances);
            std::move(generated.begin(), generated.end(), std::back_inserter(tasks));
        } else if (family == "bbob5d") {
            auto generated = make_bbob_tasks(5, selector.bbob_count, selector.bbob_instances);
            std::move(generated.begin(), generated.end(), std::back_inserter(tasks));
        } else {
            throw ContractViolation("config: unknown task family " + family);
        }
    }
    if (!selector.ids.empty()) {
        const std::set<std::string> wanted(selector.ids.begin(), selector.ids.end());
        std::erase_if(tasks, [&](const TaskSpec& t) { return !wanted.contains(t.id); });
    }
    if (tasks.empty()) throw ContractViolation("config: task selection is empty");
    return tasks;
}

std::string catalog_manifest(const std::vector<TaskSpec>& tasks) {
    std::string out = "id\tfamily\tdim\tlower\tupper\tseed\toptimum_loss\n";
    for (const auto& t : tasks) {
        out += t.id + '\t' + family_name(t.family) + '\t' + std::to_string(t.dim()) + '\t';
        for (std::size_t i = 0; i < t.bounds.lower.size(); ++i) {
            if (i) out += ',';
            out += format_sig6(t.bounds.lower[i]);
        }
        out += '\t';
        for (std::size_t i = 0; i < t.bounds.upper.size(); ++i) {
            if (i) out += ',';
            out += format_sig6(t.bounds.upper[i]);
        }
        out += '\t' + std::to_string(t.seed) + '\t';
        if (t.optimum_loss) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.9g", *t.optimum_loss);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::uint64_t derive_cell_seed(std::uint64_t master_seed, const std::string& task_id,
                               const std::string& method, std::uint64_t seed) {
    std::uint64_t h = hash_combine(stable_hash("cell"), master_seed);
    h = hash_combine(h, stable_hash(task_id));
    h = hash_combine(h, stable_hash(method));
    return hash_combine(h, seed);
}

std::shared_ptr<Backend> make_mock_backend(const BackendConfig& config, std::uint64_t cell_seed) {
    ScriptedParams params;
    params.sigma = config.sigma;
    params.step = config.step;
    return std::make_shared<ScriptedBackend>(scripted_policy_from_name(config.policy), params,
                                             cell_seed);
}

// --- per-method loops ------------------------------------------------------------

namespace {

RequestOptions request_options(const RunConfig& config) {
    RequestOptions opts;
    opts.model = config.backend.model;
    opts.temperature = config.backend.temperature;
    opts.max_tokens = config.backend.max_tokens;
    return opts;
}

void run_llm(const TaskSpec& task, Backend& backend, std::uint64_t cell_seed,
             const RunConfig& config, RunRecord& record) {
    ProposerContext ctx;
    ctx.template_kind = template_for_family(task.family);
    ctx.keys = task.keys;
    ctx.bounds = task.bounds;

    Rng rng(hash_combine(cell_seed, stable_hash("llm")));
    const auto opts = request_options(config);
    record.raw_texts = json::array();

    for (int trial = 1; trial <= config.budget; ++trial) {
        const auto proposed = propose_next(backend, ctx, rng, opts);
        const double loss = evaluate(task, proposed.proposal.point);
        record.points.push_back(proposed.proposal.point);
        record.losses.push_back(loss);
        record.flags.push_back({proposed.proposal.clamped, proposed.fallback, false});
        record.raw_texts.push_back(proposed.raw_texts);
        ctx.observe(proposed.proposal.point, loss);
    }
}

void run_cma(const TaskSpec& task, std::uint64_t cell_seed, const RunConfig& config,
             RunRecord& record) {
    auto state = cma_init(task.dim(), task.bounds, hash_combine(cell_seed, stable_hash("init")));
    Rng rng(hash_combine(cell_seed, stable_hash("ask")));
    record.raw_texts = json::array();
    record.entropy_series.push_back(gaussian_entropy(state));

    int evaluated = 0;
    while (evaluated < config.budget) {
        auto gen = cma_ask(state, rng);
        const int count = std::min<int>(config.budget - evaluated, static_cast<int>(gen.candidates.size()));
        gen.candidates.resize(static_cast<std::size_t>(count));

        std::vector<double> losses;
        losses.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            const auto& point = gen.candidates[static_cast<std::size_t>(i)].point;
            const double loss = evaluate(task, point);
            losses.push_back(loss);
            record.points.push_back(point);
            record.losses.push_back(loss);
            record.flags.push_back({false, false, false});
        }
        gen.losses = std::move(losses);
        state = cma_tell(state, gen);
        record.entropy_series.push_back(gaussian_entropy(state));
        evaluated += count;
    }
    record.extra["final_state"] = cma_state_to_text(state);
}

void run_centaur(const TaskSpec& task, Backend& backend, std::uint64_t cell_seed,
                 const RunConfig& config, RunRecord& record) {
    // identical stream derivation as run_cma: a keep-all backend reproduces it
    auto state = cma_init(task.dim(), task.bounds, hash_combine(cell_seed, stable_hash("init")));
    Rng rng(hash_combine(cell_seed, stable_hash("ask")));
    const auto opts = request_options(config);
    record.raw_texts = json::array();
    record.entropy_series.push_back(gaussian_entropy(state));

    std::vector<Observation> history;
    int evaluated = 0;
    while (evaluated < config.budget) {
        auto step = centaur_step(state, backend, task, history, config.budget - evaluated,
                                 evaluated + 1, rng, opts);
        for (std::size_t i = 0; i < step.observations.size(); ++i) {
            const auto& obs = step.observations[i];
            record.points.push_back(obs.point);
            record.losses.push_back(obs.loss);
            record.flags.push_back({step.clamped[i], false, step.injected[i]});
            history.push_back(obs);
        }
        record.raw_texts.push_back({{"step", evaluated + 1},
                                    {"text", step.raw_text},
                                    {"parse_failed", step.parse_failed}});
        record.entropy_series.push_back(gaussian_entropy(step.state));
        evaluated += static_cast<int>(step.observations.size());
        state = std::move(step.state);
    }
    record.extra["final_state"] = cma_state_to_text(state);
}

void run_mcts_method(const TaskSpec& task, Backend& backend, std::uint64_t cell_seed,
                     const RunConfig& config, RunRecord& record) {
    MctsConfig mcts_config;
    mcts_config.k = config.mcts_k;
    mcts_config.c = config.mcts_c;
    mcts_config.budget = config.budget;
    Rng rng(hash_combine(cell_seed, stable_hash("mcts")));

    const auto run = run_mcts(task, backend, mcts_config, rng, request_options(config));
    record.raw_texts = json::array();
    for (std::size_t i = 0; i < run.observations.size(); ++i) {
        record.points.push_back(run.observations[i].point);
        record.losses.push_back(run.observations[i].loss);
        record.flags.push_back({run.clamped[i] ? true : false, run.fallback[i] ? true : false, false});
        record.raw_texts.push_back(run.raw_texts[i]);
    }

    json tree = json::array();
    for (const auto& node : run.tree.nodes()) {
        json n;
        n["id"] = node.id;
        n["parent"] = node.parent ? json(*node.parent) : json(nullptr);
        n["point"] = node.point ? json(*node.point) : json(nullptr);
        n["loss"] = node.loss ? json(*node.loss) : json(nullptr);
        n["visits"] = node.visits;
        n["value"] = node.value;
        tree.push_back(n);
    }
    record.extra["tree"] = tree;
}

} // namespace

RunRecord run_single(const TaskSpec& task, const std::string& method, std::uint64_t seed,
                     std::uint64_t cell_seed, Backend& backend, const RunConfig& config) {
    RunRecord record;
    record.task_id = task.id;
    record.family = family_name(task.family);
    record.method = method;
    record.seed = seed;
    record.cell_seed = cell_seed;
    record.budget = config.budget;
    // the table's model axis: mock cells are labeled by policy, the rest by
    // the configured model
    record.backend_name = config.backend.mode == "mock"
                              ? backend.name()
                              : config.backend.mode + ":" + config.backend.model;
    record.config_snapshot = config.to_json();
    record.extra = json::object();

    // instrumented budget audit
    TaskSpec counted = task;
    auto counter = std::make_shared<std::atomic<int>>(0);
    const auto inner = task.evaluator;
    counted.evaluator = [counter, inner](std::span<const double> x) {
        counter->fetch_add(1, std::memory_order_relaxed);
        return inner(x);
    };

    const auto started = std::chrono::steady_clock::now();
    if (method == "llm")
        run_llm(counted, backend, cell_seed, config, record);
    else if (method == "cma")
        run_cma(counted, cell_seed, config, record);
    else if (method == "centaur")
        run_centaur(counted, backend, cell_seed, config, record);
    else if (method == "mcts")
        run_mcts_method(counted, backend, cell_seed, config, record);
    else
        throw ContractViolation("run_single: unknown method " + method);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();

    if (counter->load() != config.budget)
        throw ContractViolation("run_single: evaluation count " + std::to_string(counter->load()) +
                                " != budget " + std::to_string(config.budget));

    int clamped = 0, fallback = 0;
    for (const auto& f : record.flags) {
        clamped += f.clamped ? 1 : 0;
        fallback += f.fallback ? 1 : 0;
    }
    record.metrics = summarize({record.points, record.losses, task.bounds}, clamped, fallback);

    // wall time is nondeterministic; deterministic modes pin it to zero so
    // reruns are byte-identical
    const bool deterministic = config.backend.mode == "mock" || config.backend.mode == "replay";
    record.wall_ms = deterministic ? 0 : elapsed;
    return record;
}

// --- experiment --------------------------------------------------------------------

namespace {

/// Paces live requests with a token-bucket clock.
class RateLimitedBackend final : public Backend {
public:
    RateLimitedBackend(std::shared_ptr<Backend> inner, double rps)
        : inner_(std::move(inner)), interval_(std::chrono::duration<double>(1.0 / rps)) {}

    std::string name() const override { return inner_->name(); }

    CompletionResponse complete(const CompletionRequest& req) override {
        acquire();
        return inner_->complete(req);
    }

private:
    void acquire() {
        std::chrono::steady_clock::time_point wake;
        {
            std::lock_guard lock(mutex_);
            const auto now = std::chrono::steady_clock::now();
            next_ = std::max(next_, now);
            wake = next_;
            next_ += std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval_);
        }
        std::this_thread::sleep_until(wake);
    }

    std::shared_ptr<Backend> inner_;
    std::chrono::duration<double> interval_;
    std::chrono::steady_clock::time_point next_ = std::chrono::steady_clock::now();
    std::mutex mutex_;
};

/// Streams lines to disk in submission-index order: a record is flushed only
/// after every earlier cell flushed, so a killed batch leaves a clean prefix
/// of complete lines.
class OrderedWriter {
public:
    explicit OrderedWriter(const std::string& path) : out_(path, std::ios::trunc) {
        if (!out_) throw Error("cannot open " + path + " for writing");
    }

    void submit(std::size_t index, std::string line) {
        std::lock_guard lock(mutex_);
        pending_[index] = std::move(line);
        while (!pending_.empty() && pending_.begin()->first == next_) {
            out_ << pending_.begin()->second << '\n';
            out_.flush();
            pending_.erase(pending_.begin());
            ++next_;
        }
    }

private:
    std::ofstream out_;
    std::map<std::size_t, std::string> pending_;
    std::size_t next_ = 0;
    std::mutex mutex_;
};

std::shared_ptr<Backend> make_shared_backend(const RunConfig& config) {
    const auto& b = config.backend;
    if (b.mode == "replay")
        return std::make_shared<ReplayBackend>(ReplayCache::load_file(b.cache_path),
                                               "replay:" + b.model);
    if (b.mode == "live" || b.mode == "record") {
        HttpBackendConfig http;
        http.base_url = b.base_url;
        http.api_key_env = b.api_key_env;
        std::shared_ptr<Backend> live = std::make_shared<HttpBackend>(http);
        if (b.requests_per_second > 0.0)
            live = std::make_shared<RateLimitedBackend>(live, b.requests_per_second);
        if (b.mode == "record")
            return std::make_shared<RecordingBackend>(live, std::make_shared<ReplayCache>(),
                                                      b.cache_path);
        return live;
    }
    return nullptr; // mock mode builds per-cell backends
}

} // namespace

std::shared_ptr<Backend> make_configured_backend(const RunConfig& config, std::uint64_t seed) {
    if (auto shared = make_shared_backend(config)) return shared;
    return make_mock_backend(config.backend, seed);
}

ExperimentResult run_experiment(const RunConfig& config) {
    config.validate();
    const auto catalog = build_catalog(config.tasks);

    std::filesystem::create_directories(config.output_dir);
    {
        std::ofstream cfg(config.output_dir + "/config.json");
        cfg << config.to_json().dump(2) << '\n';
        std::ofstream manifest(config.output_dir + "/catalog.tsv");
        manifest << catalog_manifest(catalog);
    }

    struct Cell {
        const TaskSpec* task;
        std::string method;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const auto& task : catalog)
        for (const auto& method : config.methods)
            for (const auto seed : config.seeds) cells.push_back({&task, method, seed});

    const auto shared_backend = make_shared_backend(config);

    ExperimentResult result;
    result.records_path = config.output_dir + "/records.jsonl";
    result.records.resize(cells.size());
    OrderedWriter writer(result.records_path);

    std::atomic<std::size_t> next_cell{0};
    std::atomic<bool> all_ok{true};

    auto worker = [&] {
        while (true) {
            const std::size_t index = next_cell.fetch_add(1);
            if (index >= cells.size()) return;
            const auto& cell = cells[index];
            const auto cell_seed =
                derive_cell_seed(config.master_seed, cell.task->id, cell.method, cell.seed);

            RunRecord record;
            try {
                auto backend = shared_backend ? shared_backend
                                              : make_mock_backend(config.backend, cell_seed);
                record = run_single(*cell.task, cell.method, cell.seed, cell_seed, *backend, config);
            } catch (const std::exception& e) {
                record = RunRecord{};
                record.task_id = cell.task->id;
                record.family = family_name(cell.task->family);
                record.method = cell.method;
                record.seed = cell.seed;
                record.cell_seed = cell_seed;
                record.budget = config.budget;
                record.backend_name = config.backend.mode == "mock"
                                          ? "mock:" + config.backend.policy
                                          : config.backend.mode + ":" + config.backend.model;
                record.config_snapshot = config.to_json();
                record.raw_texts = json::array();
                record.extra = json::object();
                record.failed = true;
                record.error = e.what();
                all_ok = false;
            }
            writer.submit(index, run_record_to_line(record));
            result.records[index] = std::move(record);
        }
    };

    int workers = config.parallelism == 0
                      ? std::max<int>(1, static_cast<int>(std::thread::hardware_concurrency()))
                      : config.parallelism;
    workers = std::min<int>(workers, static_cast<int>(cells.size()));
    // cache cursors are consumed per digest, and identical early prompts occur
    // across cells; recorded sessions only replay faithfully in cell order
    if ((config.backend.mode == "replay" || config.backend.mode == "record") && workers > 1) {
        std::fprintf(stderr, "run: %s mode serializes cells to keep the cache order reproducible\n",
                     config.backend.mode.c_str());
        workers = 1;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    result.all_ok = all_ok.load();
    return result;
}

// --- tables and traces ----------------------------------------------------------------

namespace {

std::string fmt(double v, const char* spec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

constexpr const char* kMethods[] = {"llm", "cma", "centaur", "mcts"};

} // namespace

void emit_tables(const std::vector<RunRecord>& records, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);

    // (backend, family) -> method -> (task#seed) -> record
    std::map<std::pair<std::string, std::string>,
             std::map<std::string, std::map<std::string, const RunRecord*>>>
        groups;
    for (const auto& r : records) {
        if (r.failed) continue;
        const auto cell_key = r.task_id + "#" + std::to_string(r.seed);
        groups[{r.backend_name, r.family}][r.method][cell_key] = &r;
    }

    std::ofstream table(out_dir + "/table1.tsv");
    table << "backend\tfamily\tcells";
    for (const char* opp : {"cma", "centaur", "mcts"}) table << "\tllm_vs_" << opp;
    for (const char* m : kMethods) table << "\tbest_step_" << m;
    for (const char* m : kMethods) table << "\tcov50_" << m;
    for (const char* m : kMethods) table << "\tL_" << m;
    for (const char* m : kMethods) table << "\tL_n_" << m;
    table << '\n';

    std::ofstream dynamics(out_dir + "/coverage_dynamics.tsv");
    dynamics << "backend\tfamily\tmethod\tk\tmean_cov\tn\n";

    for (const auto& [group_key, by_method] : groups) {
        const auto& [backend, family] = group_key;

        std::size_t n_cells = 0;
        for (const auto& [method, cells] : by_method) n_cells = std::max(n_cells, cells.size());
        table << backend << '\t' << family << '\t' << n_cells;

        // pairwise win counts: plain proposer vs each optimizer
        for (const char* opp : {"cma", "centaur", "mcts"}) {
            table << '\t';
            const auto llm_it = by_method.find("llm");
            const auto opp_it = by_method.find(opp);
            if (llm_it == by_method.end() || opp_it == by_method.end()) continue;
            std::vector<double> a, b;
            if (llm_it->second.size() != opp_it->second.size())
                throw ContractViolation("emit_tables: incomparable catalogs for llm vs " +
                                        std::string(opp));
            for (const auto& [cell, rec] : llm_it->second) {
                const auto other = opp_it->second.find(cell);
                if (other == opp_it->second.end())
                    throw ContractViolation("emit_tables: incomparable catalogs for llm vs " +
                                            std::string(opp) + " at cell " + cell);
                a.push_back(rec->metrics.best_loss);
                b.push_back(other->second->metrics.best_loss);
            }
            const auto wins = pairwise_wins(a, b);
            table << wins.a_wins << ':' << wins.b_wins << ':' << wins.ties;
        }

        auto mean_of = [&](const char* method, auto&& extract) -> std::pair<double, int> {
            const auto it = by_method.find(method);
            if (it == by_method.end()) return {0.0, 0};
            double sum = 0.0;
            int n = 0;
            for (const auto& [cell, rec] : it->second) {
                const auto v = extract(*rec);
                if (!v) continue;
                sum += *v;
                ++n;
            }
            return {n ? sum / n : 0.0, n};
        };

        for (const char* m : kMethods) {
            const auto [v, n] = mean_of(m, [](const RunRecord& r) -> std::optional<double> {
                return static_cast<double>(r.metrics.best_step);
            });
            table << '\t' << (n ? fmt(v, "%.1f") : "");
        }
        for (const char* m : kMethods) {
            const auto [v, n] = mean_of(m, [](const RunRecord& r) -> std::optional<double> {
                if (r.metrics.coverage_series.empty()) return std::nullopt;
                return r.metrics.coverage_series.back().second;
            });
            table << '\t' << (n ? fmt(v, "%.1f") : "");
        }
        // runs without a defined L are excluded from the mean; the count
        // column reports how many contributed
        std::map<std::string, int> l_counts;
        for (const char* m : kMethods) {
            const auto [v, n] = mean_of(m, [](const RunRecord& r) { return r.metrics.norm_traj_length; });
            l_counts[m] = n;
            table << '\t' << (n ? fmt(v, "%.2f") : "");
        }
        for (const char* m : kMethods) table << '\t' << l_counts[m];
        table << '\n';

        for (const auto& [method, cells] : by_method) {
            std::map<int, std::pair<double, int>> by_k;
            for (const auto& [cell, rec] : cells)
                for (const auto& [k, cov] : rec->metrics.coverage_series) {
                    by_k[k].first += cov;
                    by_k[k].second += 1;
                }
            for (const auto& [k, acc] : by_k)
                dynamics << backend << '\t' << family << '\t' << method << '\t' << k << '\t'
                         << fmt(acc.first / acc.second, "%.2f") << '\t' << acc.second << '\n';
        }
    }
}

void emit_traces(const std::vector<RunRecord>& records, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const auto& r : records) {
        if (r.failed) continue;
        if (r.points.empty() || r.points.front().size() != 2) {
            std::fprintf(stderr, "emit_traces: skipping non-2D record %s/%s/%llu\n",
                         r.task_id.c_str(), r.method.c_str(),
                         static_cast<unsigned long long>(r.seed));
            continue;
        }
        const auto path = out_dir + "/trace_" + r.task_id + "_" + r.method + "_" +
                          std::to_string(r.seed) + ".tsv";
        std::ofstream out(path);
        out << "step\tx0\tx1\tloss\tclamped\tfallback\tinjected\n";
        for (std::size_t i = 0; i < r.points.size(); ++i) {
            out << (i + 1) << '\t' << format_sig6(r.points[i][0]) << '\t'
                << format_sig6(r.points[i][1]) << '\t' << format_sig6(r.losses[i]) << '\t'
                << (r.flags[i].clamped ? 1 : 0) << '\t' << (r.flags[i].fallback ? 1 : 0) << '\t'
                << (r.flags[i].injected ? 1 : 0) << '\n';
        }
    }
}

} // namespace bbo
