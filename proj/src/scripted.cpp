#include "bbo/scripted.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "bbo/errors.hpp"
#include "bbo/prompts.hpp"

namespace bbo {

using nlohmann::json;

ScriptedPolicy scripted_policy_from_name(const std::string& name) {
    if (name == "uniform_random") return ScriptedPolicy::UniformRandom;
    if (name == "greedy_perturb") return ScriptedPolicy::GreedyPerturb;
    if (name == "linear_walker") return ScriptedPolicy::LinearWalker;
    throw ContractViolation("unknown scripted policy: " + name);
}

std::string scripted_policy_name(ScriptedPolicy policy) {
    switch (policy) {
    case ScriptedPolicy::UniformRandom: return "uniform_random";
    case ScriptedPolicy::GreedyPerturb: return "greedy_perturb";
    case ScriptedPolicy::LinearWalker: return "linear_walker";
    }
    throw ContractViolation("unknown scripted policy");
}

namespace {

json point_to_json(const std::vector<std::string>& keys, const std::vector<double>& point) {
    json obj;
    for (std::size_t i = 0; i < keys.size(); ++i) obj[keys[i]] = point[i];
    return obj;
}

bool seen(const std::vector<Observation>& history, const std::vector<double>& point) {
    return std::any_of(history.begin(), history.end(),
                       [&](const Observation& o) { return o.point == point; });
}

std::vector<double> uniform_point(const ParsedPrompt& prompt, Rng& rng) {
    const int d = prompt.bounds.dim();
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<double> p(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            p[static_cast<std::size_t>(i)] = rng.uniform(prompt.bounds.lower[static_cast<std::size_t>(i)],
                                                          prompt.bounds.upper[static_cast<std::size_t>(i)]);
        if (!seen(prompt.history, p)) return p;
    }
    throw ContractViolation("scripted backend: could not find an unseen uniform point");
}

std::string keep_all_reply(std::size_t n) {
    json arr = json::array();
    for (std::size_t i = 0; i < n; ++i) arr.push_back("keep");
    return arr.dump();
}

} // namespace

// --- ScriptedBackend --------------------------------------------------------

ScriptedBackend::ScriptedBackend(ScriptedPolicy policy, ScriptedParams params, std::uint64_t seed)
    : policy_(policy), params_(std::move(params)), rng_(hash_combine(stable_hash("scripted"), seed)) {
    if (params_.sigma <= 0.0) throw ContractViolation("ScriptedBackend: sigma must be > 0");
    if (params_.step <= 0.0) throw ContractViolation("ScriptedBackend: step must be > 0");
    if (!params_.direction.empty()) {
        double norm = 0.0;
        for (double v : params_.direction) norm += v * v;
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw ContractViolation("ScriptedBackend: direction must be non-zero");
        for (auto& v : params_.direction) v /= norm;
    }
}

std::string ScriptedBackend::name() const { return "mock:" + scripted_policy_name(policy_); }

CompletionResponse ScriptedBackend::complete(const CompletionRequest& req) {
    req.validate();
    std::lock_guard lock(mutex_);
    return {answer(req.messages.back().content), 0, 0};
}

std::vector<CompletionResponse> ScriptedBackend::complete_batch(const CompletionRequest& req, int n) {
    // sequential so the stream of draws never depends on thread scheduling
    std::vector<CompletionResponse> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(complete(req));
    return out;
}

std::string ScriptedBackend::answer(const std::string& prompt) {
    const auto parsed = parse_rendered_prompt(prompt);
    if (parsed.is_override) return keep_all_reply(parsed.override_candidates.size());

    const int d = parsed.bounds.dim();

    switch (policy_) {
    case ScriptedPolicy::UniformRandom:
        return point_to_json(parsed.keys, uniform_point(parsed, rng_)).dump();

    case ScriptedPolicy::GreedyPerturb: {
        if (parsed.history.empty())
            return point_to_json(parsed.keys, uniform_point(parsed, rng_)).dump();
        const auto best = std::min_element(parsed.history.begin(), parsed.history.end(),
                                           [](const Observation& a, const Observation& b) {
                                               return a.loss < b.loss;
                                           });
        // noise scale is relative to each axis width so the policy behaves
        // the same on [0,1]^2 and [-5,5]^d
        for (int attempt = 0; attempt < 100; ++attempt) {
            std::vector<double> p(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) {
                const double width = parsed.bounds.upper[static_cast<std::size_t>(i)] -
                                     parsed.bounds.lower[static_cast<std::size_t>(i)];
                p[static_cast<std::size_t>(i)] = best->point[static_cast<std::size_t>(i)] +
                                                 params_.sigma * width * rng_.normal();
            }
            p = parsed.bounds.clamp(p);
            if (!seen(parsed.history, p)) return point_to_json(parsed.keys, p).dump();
        }
        return point_to_json(parsed.keys, uniform_point(parsed, rng_)).dump();
    }

    case ScriptedPolicy::LinearWalker: {
        if (parsed.history.empty())
            return point_to_json(parsed.keys, uniform_point(parsed, rng_)).dump();

        std::vector<double> dir = params_.direction;
        if (dir.empty()) {
            Rng dir_rng(hash_combine(stable_hash("walker_dir"), static_cast<std::uint64_t>(d)));
            dir = dir_rng.normal_vector(d);
            double norm = 0.0;
            for (double v : dir) norm += v * v;
            norm = std::sqrt(norm);
            for (auto& v : dir) v /= norm;
        }
        if (static_cast<int>(dir.size()) != d)
            throw ContractViolation("ScriptedBackend: direction dimension mismatch");

        const auto& last = parsed.history.back().point;
        for (int j = 1; j <= 50; ++j) {
            std::vector<double> p(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) {
                const double width = parsed.bounds.upper[static_cast<std::size_t>(i)] -
                                     parsed.bounds.lower[static_cast<std::size_t>(i)];
                double v = last[static_cast<std::size_t>(i)] +
                           j * params_.step * width * dir[static_cast<std::size_t>(i)];
                // billiard reflection off the box walls
                const double lo = parsed.bounds.lower[static_cast<std::size_t>(i)];
                const double hi = parsed.bounds.upper[static_cast<std::size_t>(i)];
                while (v < lo || v > hi) {
                    if (v < lo) v = 2.0 * lo - v;
                    if (v > hi) v = 2.0 * hi - v;
                }
                p[static_cast<std::size_t>(i)] = v;
            }
            if (!seen(parsed.history, p)) return point_to_json(parsed.keys, p).dump();
        }
        return point_to_json(parsed.keys, uniform_point(parsed, rng_)).dump();
    }
    }
    throw ContractViolation("ScriptedBackend: unknown policy");
}

// --- KeepAllBackend ----------------------------------------------------------

KeepAllBackend::KeepAllBackend(std::uint64_t seed)
    : rng_(hash_combine(stable_hash("keep_all"), seed)) {}

CompletionResponse KeepAllBackend::complete(const CompletionRequest& req) {
    req.validate();
    std::lock_guard lock(mutex_);
    const auto parsed = parse_rendered_prompt(req.messages.back().content);
    if (parsed.is_override)
        return {keep_all_reply(parsed.override_candidates.size()), 0, 0};
    return {point_to_json(parsed.keys, uniform_point(parsed, rng_)).dump(), 0, 0};
}

std::vector<CompletionResponse> KeepAllBackend::complete_batch(const CompletionRequest& req, int n) {
    std::vector<CompletionResponse> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(complete(req));
    return out;
}

// --- OracleOverrideBackend -----------------------------------------------------

OracleOverrideBackend::OracleOverrideBackend(std::vector<double> point) : point_(std::move(point)) {
    if (point_.empty()) throw ContractViolation("OracleOverrideBackend: point required");
}

CompletionResponse OracleOverrideBackend::complete(const CompletionRequest& req) {
    req.validate();
    const auto parsed = parse_rendered_prompt(req.messages.back().content);
    if (static_cast<int>(point_.size()) != parsed.bounds.dim())
        throw ContractViolation("OracleOverrideBackend: point dimension mismatch");
    if (!parsed.is_override)
        return {point_to_json(parsed.keys, point_).dump(), 0, 0};

    json arr = json::array();
    arr.push_back(point_to_json(parsed.keys, point_));
    for (std::size_t i = 1; i < parsed.override_candidates.size(); ++i) arr.push_back("keep");
    return {arr.dump(), 0, 0};
}

std::vector<CompletionResponse> OracleOverrideBackend::complete_batch(const CompletionRequest& req,
                                                                      int n) {
    std::vector<CompletionResponse> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(complete(req));
    return out;
}

} // namespace bbo
