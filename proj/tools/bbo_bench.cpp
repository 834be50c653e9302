#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbo/bbob.hpp"
#include "bbo/errors.hpp"
#include "bbo/probe.hpp"
#include "bbo/prompts.hpp"
#include "bbo/record.hpp"
#include "bbo/runner.hpp"
#include "bbo/scripted.hpp"

namespace {

using nlohmann::json;

int cmd_run(const std::string& config_path, const std::string& output_override,
            const std::string& mode_override, const std::string& policy_override) {
    auto config = bbo::RunConfig::load_file(config_path);
    if (!output_override.empty()) config.output_dir = output_override;
    if (!mode_override.empty()) config.backend.mode = mode_override;
    if (!policy_override.empty()) config.backend.policy = policy_override;
    config.validate();

    const auto result = bbo::run_experiment(config);
    std::size_t failed = 0;
    for (const auto& r : result.records) failed += r.failed ? 1 : 0;
    std::printf("ran %zu cells, %zu failed, records at %s\n", result.records.size(), failed,
                result.records_path.c_str());
    return result.all_ok ? 0 : 1;
}

int cmd_tables(const std::string& records_path, const std::string& out_dir) {
    const auto records = bbo::load_records(records_path);
    bbo::emit_tables(records, out_dir);
    std::printf("wrote %s/table1.tsv and %s/coverage_dynamics.tsv\n", out_dir.c_str(),
                out_dir.c_str());
    return 0;
}

int cmd_traces(const std::string& records_path, const std::string& out_dir) {
    const auto records = bbo::load_records(records_path);
    bbo::emit_traces(records, out_dir);
    std::printf("wrote traces to %s\n", out_dir.c_str());
    return 0;
}

int cmd_catalog(const std::string& config_path, const std::string& out_path) {
    const auto config = bbo::RunConfig::load_file(config_path);
    const auto manifest = bbo::catalog_manifest(bbo::build_catalog(config.tasks));
    if (out_path.empty() || out_path == "-") {
        std::fputs(manifest.c_str(), stdout);
    } else {
        std::ofstream out(out_path);
        out << manifest;
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

json probe_result_to_json(const bbo::ProbeResult& result, std::uint64_t seed,
                          const std::string& task_id, const std::string& backend_name) {
    json j;
    j["task"] = task_id;
    j["backend"] = backend_name;
    j["seed"] = seed;
    j["regime"] = bbo::probe_regime_name(result.regime);
    j["evaluations"] = result.evaluations;
    auto obs_array = [](const std::vector<bbo::Observation>& observations) {
        json arr = json::array();
        for (const auto& o : observations)
            arr.push_back({{"step", o.step}, {"point", o.point}, {"loss", o.loss}});
        return arr;
    };
    j["seed_points"] = obs_array(result.seed_points);
    j["proposals"] = obs_array(result.proposals);
    json flags = json::array();
    for (const auto f : result.anchor_flags) flags.push_back(bbo::anchor_flag_name(f));
    j["anchor_flags"] = flags;
    j["raw_texts"] = result.raw_texts;
    return j;
}

int cmd_probe(const std::string& config_path, const std::string& policy, double sigma, double step,
              std::uint64_t task_seed, std::vector<std::uint64_t> seeds,
              const std::string& regime_arg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto task = bbo::make_probe_sphere_task(task_seed);

    std::vector<bbo::ProbeRegime> regimes;
    if (regime_arg == "blackbox" || regime_arg == "both") regimes.push_back(bbo::ProbeRegime::BlackBox);
    if (regime_arg == "bo_pretend" || regime_arg == "both")
        regimes.push_back(bbo::ProbeRegime::BoPretend);
    if (regimes.empty()) throw bbo::ContractViolation("probe: unknown regime " + regime_arg);

    // with a config the probe talks to its backend (live/record/replay/mock);
    // without one the scripted policy flags apply
    std::optional<bbo::RunConfig> config;
    if (!config_path.empty()) config = bbo::RunConfig::load_file(config_path);

    std::ofstream records(out_dir + "/probe_records.jsonl");
    std::ofstream plot(out_dir + "/probe_plot.tsv");
    plot << "seed\tregime\torder\tx\ty\tloss\tkind\tanchor\n";

    bbo::RequestOptions opts;
    if (config) {
        opts.model = config->backend.model;
        opts.temperature = config->backend.temperature;
        opts.max_tokens = config->backend.max_tokens;
    }
    for (const auto seed : seeds) {
        for (const auto regime : regimes) {
            std::shared_ptr<bbo::Backend> backend;
            if (config) {
                backend = bbo::make_configured_backend(*config, seed);
            } else {
                bbo::ScriptedParams params;
                params.sigma = sigma;
                params.step = step;
                backend = std::make_shared<bbo::ScriptedBackend>(
                    bbo::scripted_policy_from_name(policy), params, seed);
            }
            const auto result = bbo::run_probe(task, *backend, regime, seed, opts);
            records << probe_result_to_json(result, seed, task.id, backend->name()).dump() << '\n';

            const auto regime_name = bbo::probe_regime_name(regime);
            for (const auto& o : result.seed_points)
                plot << seed << '\t' << regime_name << '\t' << o.step << '\t'
                     << bbo::format_sig6(o.point[0]) << '\t' << bbo::format_sig6(o.point[1]) << '\t'
                     << bbo::format_sig6(o.loss) << "\tseed\t\n";
            for (std::size_t i = 0; i < result.proposals.size(); ++i) {
                const auto& o = result.proposals[i];
                plot << seed << '\t' << regime_name << '\t' << o.step << '\t'
                     << bbo::format_sig6(o.point[0]) << '\t' << bbo::format_sig6(o.point[1]) << '\t'
                     << bbo::format_sig6(o.loss) << "\tproposal\t"
                     << bbo::anchor_flag_name(result.anchor_flags[i]) << '\n';
            }
        }
    }
    std::printf("wrote %s/probe_records.jsonl and %s/probe_plot.tsv\n", out_dir.c_str(),
                out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Black-box optimization benchmarking harness"};
    app.require_subcommand(1);

    std::string config_path, records_path, out_arg;

    auto* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("--config", config_path, "config JSON file")->required();
    run->add_option("--output-dir", out_arg, "override the config's output_dir");
    std::string run_mode, run_policy;
    run->add_option("--backend-mode", run_mode, "override backend mode: live|record|replay|mock");
    run->add_option("--policy", run_policy, "override the mock policy");

    auto* tables = app.add_subcommand("tables", "aggregate records into summary tables");
    tables->add_option("--records", records_path, "records.jsonl path")->required();
    std::string tables_out = "out";
    tables->add_option("--out", tables_out, "output directory");

    auto* traces = app.add_subcommand("traces", "export per-run 2D traces");
    traces->add_option("--records", records_path, "records.jsonl path")->required();
    std::string traces_out = "out/traces";
    traces->add_option("--out", traces_out, "output directory");

    auto* catalog = app.add_subcommand("catalog", "dump the task manifest");
    catalog->add_option("--config", config_path, "config JSON file")->required();
    std::string catalog_out = "-";
    catalog->add_option("--out", catalog_out, "output file ('-' for stdout)");

    auto* probe = app.add_subcommand("probe", "run the anchoring probe protocol");
    std::string probe_config, probe_policy = "greedy_perturb";
    double probe_sigma = 0.02, probe_step = 0.01;
    std::uint64_t probe_task_seed = 0;
    std::vector<std::uint64_t> probe_seeds{0};
    std::string probe_regime = "both", probe_out = "out/probe";
    probe->add_option("--config", probe_config, "use a run config's backend instead of --policy");
    probe->add_option("--policy", probe_policy, "scripted policy");
    probe->add_option("--sigma", probe_sigma, "greedy_perturb noise scale");
    probe->add_option("--step", probe_step, "linear_walker step");
    probe->add_option("--task-seed", probe_task_seed, "probe sphere instance seed");
    probe->add_option("--seeds", probe_seeds, "probe seeds");
    probe->add_option("--regime", probe_regime, "blackbox | bo_pretend | both");
    probe->add_option("--out", probe_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_arg, run_mode, run_policy);
        if (tables->parsed()) return cmd_tables(records_path, tables_out);
        if (traces->parsed()) return cmd_traces(records_path, traces_out);
        if (catalog->parsed()) return cmd_catalog(config_path, catalog_out);
        if (probe->parsed())
            return cmd_probe(probe_config, probe_policy, probe_sigma, probe_step, probe_task_seed,
                             probe_seeds, probe_regime, probe_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
