#pragma once

#include <string>
#include <vector>

#include "bbo/backend.hpp"
#include "bbo/cma.hpp"
#include "bbo/proposer.hpp"
#include "bbo/task.hpp"

namespace bbo {

/// Everything one hybrid generation produced.
struct CentaurStep {
    CmaState state;                       // post-tell state
    std::vector<Observation> observations;
    std::vector<bool> injected;           // per observation: replaced by the override
    std::vector<bool> clamped;            // per observation: replacement was clamped
    std::string raw_text;                 // override reply
    bool parse_failed = false;            // reply unusable, generation kept as asked
};

/// One hybrid generation: ask, render the override prompt over the asked
/// candidates plus the full history, parse keep/replace decisions, evaluate
/// the (possibly modified) generation truncated to the remaining budget, and
/// tell everything back with replaced candidates flagged injected.
///
/// A malformed reply degrades to keep-all for this generation (logged in the
/// step record); BackendUnavailable propagates.
CentaurStep centaur_step(const CmaState& state, Backend& backend, const TaskSpec& task,
                         const std::vector<Observation>& history, int remaining_budget,
                         int next_step, Rng& rng, const RequestOptions& opts);

} // namespace bbo
