#include "bbo/centaur.hpp"

#include <algorithm>

#include "bbo/errors.hpp"
#include "bbo/prompts.hpp"

namespace bbo {

CentaurStep centaur_step(const CmaState& state, Backend& backend, const TaskSpec& task,
                         const std::vector<Observation>& history, int remaining_budget,
                         int next_step, Rng& rng, const RequestOptions& opts) {
    if (remaining_budget < 1) throw ContractViolation("centaur_step: no budget remaining");

    auto gen = cma_ask(state, rng);
    const int count = std::min<int>(remaining_budget, static_cast<int>(gen.candidates.size()));
    gen.candidates.resize(static_cast<std::size_t>(count));

    ProposerContext ctx;
    ctx.template_kind = template_for_family(task.family);
    ctx.keys = task.keys;
    ctx.bounds = task.bounds;
    ctx.history = history;
    ctx.trial_num = next_step;

    std::vector<std::vector<double>> asked;
    asked.reserve(static_cast<std::size_t>(count));
    for (const auto& c : gen.candidates) asked.push_back(c.point);

    CentaurStep step;
    const auto response = backend.complete(opts.make(render_override_prompt(ctx, asked)));
    step.raw_text = response.text;

    std::vector<bool> replaced_clamped(static_cast<std::size_t>(count), false);
    const auto decision = parse_override_reply(response.text, task.keys, asked.size());
    if (!decision) {
        step.parse_failed = true;
    } else {
        for (int i = 0; i < count; ++i) {
            const auto& replacement = decision->replacements[static_cast<std::size_t>(i)];
            if (!replacement) continue;
            auto point = task.bounds.clamp(*replacement);
            const bool was_clamped = point != *replacement;
            const bool duplicate = std::any_of(history.begin(), history.end(), [&](const Observation& o) {
                return o.point == point;
            });
            if (duplicate) continue; // unusable replacement, candidate kept as asked
            gen.candidates[static_cast<std::size_t>(i)].point = std::move(point);
            gen.candidates[static_cast<std::size_t>(i)].injected = true;
            replaced_clamped[static_cast<std::size_t>(i)] = was_clamped;
        }
    }

    std::vector<double> losses;
    losses.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const auto& cand = gen.candidates[static_cast<std::size_t>(i)];
        const double loss = evaluate(task, cand.point);
        losses.push_back(loss);
        step.observations.push_back({next_step + i, cand.point, loss});
        step.injected.push_back(cand.injected);
        step.clamped.push_back(replaced_clamped[static_cast<std::size_t>(i)]);
    }
    gen.losses = std::move(losses);

    step.state = cma_tell(state, gen);
    return step;
}

} // namespace bbo
