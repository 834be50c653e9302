#include "bbo/probe.hpp"

#include <algorithm>
#include <cmath>

#include "bbo/errors.hpp"
#include "bbo/prompts.hpp"

namespace bbo {

namespace {

constexpr int kSeedPoints = 10;
constexpr int kProposals = 5;

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace

std::string probe_regime_name(ProbeRegime regime) {
    return regime == ProbeRegime::BlackBox ? "blackbox" : "bo_pretend";
}

std::string anchor_flag_name(AnchorFlag flag) {
    switch (flag) {
    case AnchorFlag::NearBest: return "near_best";
    case AnchorFlag::NearLast: return "near_last";
    case AnchorFlag::Neither: return "neither";
    }
    throw ContractViolation("anchor_flag_name: unknown flag");
}

AnchorFlag classify_anchor(const std::vector<double>& proposal, const std::vector<double>& best_point,
                           const std::vector<double>& last_point, const Bounds& bounds) {
    const double d_best = distance(proposal, best_point);
    const double d_last = distance(proposal, last_point);
    if (std::min(d_best, d_last) > 0.5 * bounds.diagonal()) return AnchorFlag::Neither;
    return d_best <= d_last ? AnchorFlag::NearBest : AnchorFlag::NearLast;
}

ProbeResult run_probe(const TaskSpec& task, Backend& backend, ProbeRegime regime,
                      std::uint64_t seed, const RequestOptions& opts) {
    if (task.dim() != 2 || task.bounds != Bounds::box(2, 0.0, 1.0))
        throw ContractViolation("run_probe: task must be 2D on [0,1]^2");

    ProbeResult result;
    result.regime = regime;

    // seed points depend on the seed alone, shared across regimes
    Rng seed_rng(hash_combine(stable_hash("probe_seeds"), seed));
    ProposerContext ctx;
    ctx.template_kind = regime == ProbeRegime::BlackBox ? PromptTemplate::Function2d
                                                        : PromptTemplate::BoPretend;
    ctx.keys = task.keys;
    ctx.bounds = task.bounds;

    for (int i = 0; i < kSeedPoints; ++i) {
        std::vector<double> p{seed_rng.uniform(0.0, 1.0), seed_rng.uniform(0.0, 1.0)};
        const double loss = evaluate(task, p);
        ++result.evaluations;
        result.seed_points.push_back({ctx.trial_num, p, loss});
        ctx.observe(std::move(p), loss);
    }

    Rng fallback_rng(hash_combine(hash_combine(stable_hash("probe_fallback"), seed),
                                  regime == ProbeRegime::BlackBox ? 0u : 1u));
    for (int round = 0; round < kProposals; ++round) {
        const auto proposed = propose_next(backend, ctx, fallback_rng, opts);
        for (const auto& raw : proposed.raw_texts) result.raw_texts.push_back(raw);

        // references computed before the proposal joins the history
        const Observation* best = ctx.best_observation();
        const Observation& last = ctx.history.back();
        const auto flag = classify_anchor(proposed.proposal.point, best->point, last.point, ctx.bounds);

        const double loss = evaluate(task, proposed.proposal.point);
        ++result.evaluations;
        result.proposals.push_back({ctx.trial_num, proposed.proposal.point, loss});
        result.anchor_flags.push_back(flag);
        ctx.observe(proposed.proposal.point, loss);
    }
    return result;
}

} // namespace bbo
