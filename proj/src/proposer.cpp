#include "bbo/proposer.hpp"

#include <algorithm>

#include "bbo/errors.hpp"

namespace bbo {

CompletionRequest RequestOptions::make(std::string prompt) const {
    CompletionRequest req;
    req.model = model;
    req.temperature = temperature;
    req.max_tokens = max_tokens;
    req.messages.push_back({Role::User, std::move(prompt)});
    return req;
}

namespace {

constexpr int kMaxAttempts = 3;

std::vector<double> uniform_unseen(const ProposerContext& ctx, Rng& rng) {
    const int d = ctx.bounds.dim();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> p(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            p[static_cast<std::size_t>(i)] = rng.uniform(ctx.bounds.lower[static_cast<std::size_t>(i)],
                                                          ctx.bounds.upper[static_cast<std::size_t>(i)]);
        const bool repeat = std::any_of(ctx.history.begin(), ctx.history.end(),
                                        [&](const Observation& o) { return o.point == p; });
        if (!repeat) return p;
    }
    throw ContractViolation("propose_next: could not draw an unseen fallback point");
}

} // namespace

ProposeResult propose_next(Backend& backend, const ProposerContext& ctx, Rng& rng,
                           const RequestOptions& opts) {
    const std::string base_prompt = render_prompt(ctx);

    ProposeResult result;
    std::string failure_note;
    for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
        std::string prompt = base_prompt;
        if (!failure_note.empty()) {
            prompt += "\nYour previous reply could not be used (";
            prompt += failure_note;
            prompt += "). Return ONLY JSON in the required format and do not repeat any previous point.";
        }
        const auto response = backend.complete(opts.make(std::move(prompt)));
        result.raw_texts.push_back(response.text);

        auto outcome = parse_proposal(response.text, ctx.keys, ctx.bounds, ctx.history);
        if (outcome.ok()) {
            result.proposal = std::move(*outcome.proposal);
            result.proposal.parse_attempts = attempt;
            return result;
        }
        failure_note = outcome.error == ParseErrorKind::Duplicate ? "it repeated a previous point"
                                                                  : "it contained no parseable JSON point";
    }

    result.fallback = true;
    result.proposal.point = uniform_unseen(ctx, rng);
    result.proposal.raw_text = result.raw_texts.back();
    result.proposal.parse_attempts = kMaxAttempts;
    result.proposal.clamped = false;
    return result;
}

} // namespace bbo
