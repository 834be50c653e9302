#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "bbo/backend.hpp"
#include "bbo/rng.hpp"

namespace bbo {

/// Synthetic stand-ins for the behavioral archetypes the optimizer
/// comparison needs to run offline.
enum class ScriptedPolicy { UniformRandom, GreedyPerturb, LinearWalker };

ScriptedPolicy scripted_policy_from_name(const std::string& name);
std::string scripted_policy_name(ScriptedPolicy policy);

struct ScriptedParams {
    double sigma = 0.02;            // greedy_perturb: noise scale, in axis widths
    double step = 0.01;             // linear_walker: step length, in axis widths
    std::vector<double> direction;  // linear_walker: unit direction; seeded when empty
};

/// A backend that parses the rendered prompt it receives (bounds, history,
/// best loss) and answers with valid JSON according to its policy:
///  - uniform_random: in-bounds uniform sample
///  - greedy_perturb: best-so-far plus Gaussian noise of scale sigma,
///    resampled until unseen
///  - linear_walker: continues from the last point along a fixed unit
///    direction with a fixed step (reflecting off the box when saturated)
/// Scale parameters are relative to the per-axis bound width. Override
/// prompts are answered with keep-all.
///
/// Deterministic given the construction seed and the call sequence; batch
/// completion is sequential for the same reason.
class ScriptedBackend final : public Backend {
public:
    ScriptedBackend(ScriptedPolicy policy, ScriptedParams params, std::uint64_t seed);

    std::string name() const override;
    CompletionResponse complete(const CompletionRequest& req) override;
    std::vector<CompletionResponse> complete_batch(const CompletionRequest& req, int n) override;

private:
    std::string answer(const std::string& prompt);

    ScriptedPolicy policy_;
    ScriptedParams params_;
    Rng rng_;
    std::mutex mutex_;
};

/// Override-prompt backend that always keeps the asked generation (hybrid
/// degenerates to the plain optimizer). Proposer prompts get uniform samples.
class KeepAllBackend final : public Backend {
public:
    explicit KeepAllBackend(std::uint64_t seed);

    std::string name() const override { return "mock:keep_all"; }
    CompletionResponse complete(const CompletionRequest& req) override;
    std::vector<CompletionResponse> complete_batch(const CompletionRequest& req, int n) override;

private:
    Rng rng_;
    std::mutex mutex_;
};

/// Override-prompt backend that replaces candidate 0 with a fixed point and
/// keeps the rest (used to show the hybrid adopts external solutions).
class OracleOverrideBackend final : public Backend {
public:
    explicit OracleOverrideBackend(std::vector<double> point);

    std::string name() const override { return "mock:oracle_override"; }
    CompletionResponse complete(const CompletionRequest& req) override;
    std::vector<CompletionResponse> complete_batch(const CompletionRequest& req, int n) override;

private:
    std::vector<double> point_;
};

} // namespace bbo
