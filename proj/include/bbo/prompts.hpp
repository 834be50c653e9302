#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bbo/bounds.hpp"
#include "bbo/task.hpp"

namespace bbo {

enum class PromptTemplate { Function2d, Physical, Bbob, BoPretend };

PromptTemplate template_for_family(Family family);

/// Sequential proposer context: the rendered conversation state. History is
/// kept sorted by step; best_loss() is +inf while empty.
struct ProposerContext {
    PromptTemplate template_kind = PromptTemplate::Function2d;
    std::vector<std::string> keys;
    Bounds bounds;
    std::vector<Observation> history;
    int trial_num = 1;

    /// When set, rendered instead of the history minimum (the tree scaffold
    /// shows the global best alongside a path-only history block).
    std::optional<double> best_loss_override;

    double best_loss() const;
    const Observation* best_observation() const;

    /// Appends (trial_num, point, loss) and advances the trial counter.
    void observe(std::vector<double> point, double loss);
};

/// Number formatting used everywhere a value is substituted into a prompt:
/// 6 significant digits.
std::string format_sig6(double v);

/// One history line: "step | v0 | v1 | ... | loss".
std::string format_history_line(const Observation& obs);

/// Renders the template for the context, byte-exact up to substituted
/// values. The BO-pretend variant appends exactly one trailing line.
std::string render_prompt(const ProposerContext& ctx);

/// Renders the hybrid override prompt: full history plus the asked
/// generation, requesting a JSON array of keep/replace decisions.
std::string render_override_prompt(const ProposerContext& ctx,
                                   const std::vector<std::vector<double>>& candidates);

/// A parsed proposal. `clamped` reports whether the raw values fell outside
/// the bounds and were pulled back in.
struct Proposal {
    std::vector<double> point;
    std::string raw_text;
    int parse_attempts = 1;
    bool clamped = false;
};

enum class ParseErrorKind { Malformed, Duplicate };

struct ParseOutcome {
    std::optional<Proposal> proposal;
    ParseErrorKind error = ParseErrorKind::Malformed;
    std::string message;

    bool ok() const { return proposal.has_value(); }
};

/// Extracts the first JSON object embedded in `raw` (prose and code fences
/// tolerated), requires every key in dim_keys to be present and numeric,
/// clamps to bounds and rejects exact repeats of history points.
ParseOutcome parse_proposal(const std::string& raw, const std::vector<std::string>& dim_keys,
                            const Bounds& bounds, const std::vector<Observation>& history);

/// What a scripted backend can recover from any rendered prompt.
struct ParsedPrompt {
    std::vector<std::string> keys;
    Bounds bounds;
    std::vector<Observation> history;
    double best_loss = 0.0;
    bool is_override = false;
    std::vector<std::vector<double>> override_candidates;
};

/// Inverse of render_prompt / render_override_prompt, used by the scripted
/// stand-ins. Throws ContractViolation when the prompt shape is not
/// recognized or the history block is malformed.
ParsedPrompt parse_rendered_prompt(const std::string& prompt);

/// Keep/replace reply to an override prompt.
struct OverrideDecision {
    std::vector<std::optional<std::vector<double>>> replacements; // nullopt = keep
    std::string raw_text;
};

/// Parses a JSON array of "keep" strings / coordinate objects. Returns
/// nullopt when the reply cannot be used (caller degrades to keep-all).
std::optional<OverrideDecision> parse_override_reply(const std::string& raw,
                                                     const std::vector<std::string>& dim_keys,
                                                     std::size_t candidate_count);

} // namespace bbo
