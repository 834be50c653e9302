#pragma once

#include <string>
#include <vector>

#include "bbo/backend.hpp"
#include "bbo/prompts.hpp"
#include "bbo/rng.hpp"

namespace bbo {

/// Sampling parameters attached to every completion request.
struct RequestOptions {
    std::string model = "gpt-oss-120b";
    double temperature = 0.7;
    int max_tokens = 256;

    CompletionRequest make(std::string prompt) const;
};

struct ProposeResult {
    Proposal proposal;
    bool fallback = false;                // uniform sample after 3 failed parses
    std::vector<std::string> raw_texts;   // every attempt's raw reply, in order
};

/// One trial of the sequential proposer: render, complete, parse. On a parse
/// failure the request is retried up to 3 attempts total, each retry carrying
/// the failure as an extra instruction line; after that a uniform in-bounds
/// sample is drawn so the trial still consumes exactly one evaluation.
/// BackendUnavailable propagates to the caller.
ProposeResult propose_next(Backend& backend, const ProposerContext& ctx, Rng& rng,
                           const RequestOptions& opts);

} // namespace bbo
