#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bbo/backend.hpp"
#include "bbo/proposer.hpp"
#include "bbo/task.hpp"

namespace bbo {

enum class ProbeRegime { BlackBox, BoPretend };

std::string probe_regime_name(ProbeRegime regime);

enum class AnchorFlag { NearBest, NearLast, Neither };

std::string anchor_flag_name(AnchorFlag flag);

/// Anchoring-probe outcome: 10 uniform seed evaluations followed by 5
/// proposals, each classified by which reference point it sits closest to.
struct ProbeResult {
    ProbeRegime regime = ProbeRegime::BlackBox;
    std::vector<Observation> seed_points; // 10
    std::vector<Observation> proposals;   // 5
    std::vector<AnchorFlag> anchor_flags; // per proposal
    std::vector<std::string> raw_texts;   // every raw reply, in order
    int evaluations = 0;                  // always 15
};

/// Euclidean argmin between the best-so-far point and the most recent point;
/// Neither when both distances exceed half the domain diagonal. Ties resolve
/// to NearBest (when best and last coincide the anchor is the best point).
AnchorFlag classify_anchor(const std::vector<double>& proposal, const std::vector<double>& best_point,
                           const std::vector<double>& last_point, const Bounds& bounds);

/// Runs the probe protocol on a 2D task over [0,1]^2: evaluates 10 uniform
/// points, then for 5 rounds renders the regime's prompt with the full
/// history, obtains a proposal, evaluates and classifies it. Best/last
/// references are recomputed every round. The 10 seed points depend only on
/// the seed, so both regimes of a paired comparison share them.
ProbeResult run_probe(const TaskSpec& task, Backend& backend, ProbeRegime regime,
                      std::uint64_t seed, const RequestOptions& opts);

} // namespace bbo
