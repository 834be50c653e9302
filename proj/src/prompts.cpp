#include "bbo/prompts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "bbo/errors.hpp"

namespace bbo {

using nlohmann::json;

PromptTemplate template_for_family(Family family) {
    switch (family) {
    case Family::Functions: return PromptTemplate::Function2d;
    case Family::Physical: return PromptTemplate::Physical;
    case Family::Bbob2d:
    case Family::Bbob5d: return PromptTemplate::Bbob;
    }
    throw ContractViolation("template_for_family: unknown family");
}

double ProposerContext::best_loss() const {
    if (best_loss_override) return *best_loss_override;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& obs : history) best = std::min(best, obs.loss);
    return best;
}

const Observation* ProposerContext::best_observation() const {
    const Observation* best = nullptr;
    for (const auto& obs : history)
        if (!best || obs.loss < best->loss) best = &obs;
    return best;
}

void ProposerContext::observe(std::vector<double> point, double loss) {
    history.push_back({trial_num, std::move(point), loss});
    ++trial_num;
}

std::string format_sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string format_history_line(const Observation& obs) {
    std::string line = std::to_string(obs.step);
    for (double v : obs.point) {
        line += " | ";
        line += format_sig6(v);
    }
    line += " | ";
    line += format_sig6(obs.loss);
    return line;
}

namespace {

std::string keys_header(const std::vector<std::string>& keys) {
    std::string h = "(step";
    for (const auto& k : keys) h += " | " + k;
    h += " | loss)";
    return h;
}

std::string json_format_desc(const std::vector<std::string>& keys) {
    std::string d = "{";
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i) d += ", ";
        d += "\"" + keys[i] + "\": <float>";
    }
    d += "}";
    return d;
}

std::string bounds_clause(const std::vector<std::string>& keys, const Bounds& bounds) {
    std::string s;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i) s += ", ";
        s += keys[i] + " in [" + format_sig6(bounds.lower[i]) + ", " + format_sig6(bounds.upper[i]) + "]";
    }
    return s;
}

void append_history_block(std::string& out, const std::vector<Observation>& history) {
    for (const auto& obs : history) {
        out += format_history_line(obs);
        out += '\n';
    }
}

} // namespace

std::string render_prompt(const ProposerContext& ctx) {
    if (ctx.keys.size() != static_cast<std::size_t>(ctx.bounds.dim()))
        throw ContractViolation("render_prompt: keys/bounds dimension mismatch");

    std::string p;
    switch (ctx.template_kind) {
    case PromptTemplate::Function2d:
    case PromptTemplate::BoPretend: {
        p += "You are optimizing an unknown black-box function.\n";
        p += "Goal: suggest x and y that minimize this function (smaller is better).\n";
        p += "Search bounds: x and y must be in [" + format_sig6(ctx.bounds.lower[0]) + ", " +
             format_sig6(ctx.bounds.upper[0]) + "].\n";
        p += "Trial number: " + std::to_string(ctx.trial_num) + ".\n";
        p += "Current best loss: " + format_sig6(ctx.best_loss()) + ".\n";
        p += "History of all previous attempts (step | x | y | loss):\n";
        append_history_block(p, ctx.history);
        p += "Important: do NOT repeat any previous (x, y) pair from history.\n";
        p += "Always propose a new point that was not tried before.\n";
        p += "Return ONLY JSON in this exact format: {\"x\": <float>, \"y\": <float>}.";
        if (ctx.template_kind == PromptTemplate::BoPretend)
            p += "\nOptimize like Bayesian optimization!";
        return p;
    }
    case PromptTemplate::Physical: {
        p += "You are optimizing physical system parameters.\n";
        p += "Goal: suggest k and b that minimize loss (smaller is better).\n";
        p += "Search bounds: " + bounds_clause(ctx.keys, ctx.bounds) + ".\n";
        p += "Trial number: " + std::to_string(ctx.trial_num) + ".\n";
        p += "Current best loss: " + format_sig6(ctx.best_loss()) + ".\n";
        p += "History of all previous attempts (step | k | b | loss):\n";
        append_history_block(p, ctx.history);
        p += "Important: do NOT repeat any previous (k, b) pair from history.\n";
        p += "Always propose new parameters that were not tried before.\n";
        p += "Return ONLY JSON in this exact format: {\"k\": <float>, \"b\": <float>}.";
        return p;
    }
    case PromptTemplate::Bbob: {
        p += "You are optimizing an unknown black-box function (BBOB benchmark).\n";
        p += "Goal: suggest parameters that minimize this function.\n";
        p += "Search bounds: " + bounds_clause(ctx.keys, ctx.bounds) + ".\n";
        p += "Trial number: " + std::to_string(ctx.trial_num) + ".\n";
        p += "Current best loss: " + format_sig6(ctx.best_loss()) + ".\n";
        p += "History of all previous attempts " + keys_header(ctx.keys) + ":\n";
        append_history_block(p, ctx.history);
        p += "Important: do NOT repeat any previous parameter combination.\n";
        p += "Always propose new parameters.\n";
        p += "Return ONLY JSON: " + json_format_desc(ctx.keys) + ".";
        return p;
    }
    }
    throw ContractViolation("render_prompt: unknown template");
}

std::string render_override_prompt(const ProposerContext& ctx,
                                   const std::vector<std::vector<double>>& candidates) {
    if (candidates.empty())
        throw ContractViolation("render_override_prompt: need at least one candidate");

    std::string p;
    p += "You are assisting a CMA-ES optimizer on a black-box minimization task.\n";
    p += "Search bounds: " + bounds_clause(ctx.keys, ctx.bounds) + ".\n";
    p += "Current best loss: " + format_sig6(ctx.best_loss()) + ".\n";
    p += "History of all previous attempts " + keys_header(ctx.keys) + ":\n";
    append_history_block(p, ctx.history);

    std::string ckeys = "(index";
    for (const auto& k : ctx.keys) ckeys += " | " + k;
    ckeys += ")";
    p += "CMA-ES proposes the following candidates " + ckeys + ":\n";
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        p += std::to_string(i);
        for (double v : candidates[i]) {
            p += " | ";
            p += format_sig6(v);
        }
        p += '\n';
    }
    p += "For each candidate, either keep it or replace it with a better point.\n";
    p += "Return ONLY a JSON array with exactly " + std::to_string(candidates.size()) +
         " entries, one per candidate, in order.\n";
    p += "Each entry must be either the string \"keep\" or an object " + json_format_desc(ctx.keys) + ".\n";
    p += "Do NOT repeat any point from history.";
    return p;
}

// --- proposal parsing ---------------------------------------------------------

namespace {

// Balanced extraction of the JSON value starting at `start` ('{' or '[').
std::optional<std::string> balanced_json_at(const std::string& s, std::size_t start) {
    const char open = s[start];
    const char close = open == '{' ? '}' : ']';
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t j = start; j < s.size(); ++j) {
        const char c = s[j];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"')
            in_string = true;
        else if (c == open)
            ++depth;
        else if (c == close) {
            if (--depth == 0) return s.substr(start, j - start + 1);
        }
    }
    return std::nullopt;
}

std::optional<json> first_json_value(const std::string& raw, char opener) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] != opener) continue;
        const auto text = balanced_json_at(raw, i);
        if (!text) continue;
        json parsed = json::parse(*text, nullptr, false);
        if (!parsed.is_discarded()) return parsed;
    }
    return std::nullopt;
}

std::optional<std::vector<double>> coords_from_object(const json& obj,
                                                      const std::vector<std::string>& dim_keys) {
    if (!obj.is_object()) return std::nullopt;
    std::vector<double> point;
    point.reserve(dim_keys.size());
    for (const auto& key : dim_keys) {
        if (!obj.contains(key) || !obj[key].is_number()) return std::nullopt;
        point.push_back(obj[key].get<double>());
    }
    for (double v : point)
        if (!std::isfinite(v)) return std::nullopt;
    return point;
}

bool is_history_repeat(const std::vector<double>& point, const std::vector<Observation>& history) {
    return std::any_of(history.begin(), history.end(),
                       [&](const Observation& obs) { return obs.point == point; });
}

} // namespace

ParseOutcome parse_proposal(const std::string& raw, const std::vector<std::string>& dim_keys,
                            const Bounds& bounds, const std::vector<Observation>& history) {
    ParseOutcome out;
    out.error = ParseErrorKind::Malformed;

    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] != '{') continue;
        const auto text = balanced_json_at(raw, i);
        if (!text) continue;
        json parsed = json::parse(*text, nullptr, false);
        if (parsed.is_discarded()) continue;
        auto point = coords_from_object(parsed, dim_keys);
        if (!point) continue;

        Proposal proposal;
        proposal.raw_text = raw;
        proposal.point = bounds.clamp(*point);
        proposal.clamped = proposal.point != *point;
        if (is_history_repeat(proposal.point, history)) {
            out.error = ParseErrorKind::Duplicate;
            out.message = "proposed point repeats a history entry";
            return out;
        }
        out.proposal = std::move(proposal);
        return out;
    }
    out.message = "no JSON object with the required numeric keys found";
    return out;
}

// --- rendered prompt introspection ---------------------------------------------

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        if (end == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

// "3 | 0.25 | 0.5 | -0.83" -> fields
std::optional<std::vector<std::string>> split_bar_line(const std::string& line) {
    if (line.empty()) return std::nullopt;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto sep = line.find(" | ", start);
        if (sep == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, sep - start));
        start = sep + 3;
    }
    return fields.size() >= 2 ? std::optional(fields) : std::nullopt;
}

std::optional<double> parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

// extracts quoted keys from a '{"x": <float>, "y": <float>}' fragment
std::vector<std::string> keys_from_format_desc(const std::string& line) {
    std::vector<std::string> keys;
    std::size_t pos = line.find('{');
    if (pos == std::string::npos) return keys;
    while ((pos = line.find('"', pos)) != std::string::npos) {
        const auto end = line.find('"', pos + 1);
        if (end == std::string::npos) break;
        keys.push_back(line.substr(pos + 1, end - pos - 1));
        pos = end + 1;
    }
    return keys;
}

// "k in [0.5, 10], b in [0.05, 2]" -> per-key bounds
Bounds bounds_from_clause(const std::string& clause, const std::vector<std::string>& keys) {
    Bounds b;
    std::size_t pos = 0;
    while (true) {
        const auto open = clause.find('[', pos);
        if (open == std::string::npos) break;
        const auto comma = clause.find(',', open);
        const auto close = clause.find(']', open);
        if (comma == std::string::npos || close == std::string::npos || comma > close)
            throw ContractViolation("prompt bounds clause malformed: " + clause);
        const auto lo = parse_double(clause.substr(open + 1, comma - open - 1));
        auto hi_text = clause.substr(comma + 1, close - comma - 1);
        if (!hi_text.empty() && hi_text.front() == ' ') hi_text.erase(0, 1);
        const auto hi = parse_double(hi_text);
        if (!lo || !hi) throw ContractViolation("prompt bounds clause malformed: " + clause);
        b.lower.push_back(*lo);
        b.upper.push_back(*hi);
        pos = close + 1;
    }
    if (b.lower.size() == 1 && keys.size() > 1) {
        // "x and y must be in [0, 1]" form: one range for every axis
        b.lower.assign(keys.size(), b.lower[0]);
        b.upper.assign(keys.size(), b.upper[0]);
    }
    if (b.lower.size() != keys.size())
        throw ContractViolation("prompt bounds clause does not cover all keys: " + clause);
    return b;
}

} // namespace

ParsedPrompt parse_rendered_prompt(const std::string& prompt) {
    const auto lines = lines_of(prompt);

    ParsedPrompt out;
    std::string bounds_line;
    std::size_t history_header = lines.size();
    std::size_t candidates_header = lines.size();

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.rfind("Search bounds: ", 0) == 0) bounds_line = line;
        else if (line.rfind("Current best loss: ", 0) == 0) {
            auto text = line.substr(std::string("Current best loss: ").size());
            if (!text.empty() && text.back() == '.') text.pop_back();
            out.best_loss = text == "inf" ? std::numeric_limits<double>::infinity()
                                          : parse_double(text).value_or(0.0);
        } else if (line.rfind("History of all previous attempts", 0) == 0)
            history_header = i;
        else if (line.rfind("CMA-ES proposes the following candidates", 0) == 0) {
            candidates_header = i;
            out.is_override = true;
        } else if (line.rfind("Return ONLY", 0) == 0 || line.rfind("Each entry must be", 0) == 0) {
            auto keys = keys_from_format_desc(line);
            if (!keys.empty()) out.keys = std::move(keys);
        }
    }
    if (out.keys.empty())
        throw ContractViolation("parse_rendered_prompt: no JSON format line found");
    if (bounds_line.empty())
        throw ContractViolation("parse_rendered_prompt: no bounds line found");

    auto clause = bounds_line.substr(std::string("Search bounds: ").size());
    if (!clause.empty() && clause.back() == '.') clause.pop_back();
    out.bounds = bounds_from_clause(clause, out.keys);

    if (history_header < lines.size()) {
        for (std::size_t i = history_header + 1; i < lines.size(); ++i) {
            const auto fields = split_bar_line(lines[i]);
            if (!fields || fields->size() != out.keys.size() + 2) break;
            Observation obs;
            const auto step = parse_double((*fields)[0]);
            if (!step) break;
            obs.step = static_cast<int>(*step);
            bool ok = true;
            for (std::size_t k = 1; k + 1 < fields->size(); ++k) {
                const auto v = parse_double((*fields)[k]);
                if (!v) { ok = false; break; }
                obs.point.push_back(*v);
            }
            const auto loss = parse_double(fields->back());
            if (!ok || !loss) break;
            obs.loss = *loss;
            out.history.push_back(std::move(obs));
        }
    }

    if (candidates_header < lines.size()) {
        for (std::size_t i = candidates_header + 1; i < lines.size(); ++i) {
            const auto fields = split_bar_line(lines[i]);
            if (!fields || fields->size() != out.keys.size() + 1) break;
            std::vector<double> cand;
            bool ok = parse_double((*fields)[0]).has_value();
            for (std::size_t k = 1; k < fields->size() && ok; ++k) {
                const auto v = parse_double((*fields)[k]);
                if (!v) ok = false;
                else cand.push_back(*v);
            }
            if (!ok) break;
            out.override_candidates.push_back(std::move(cand));
        }
        if (out.override_candidates.empty())
            throw ContractViolation("parse_rendered_prompt: override prompt without candidates");
    }
    return out;
}

std::optional<OverrideDecision> parse_override_reply(const std::string& raw,
                                                     const std::vector<std::string>& dim_keys,
                                                     std::size_t candidate_count) {
    const auto arr = first_json_value(raw, '[');
    if (!arr || !arr->is_array() || arr->size() != candidate_count) return std::nullopt;

    OverrideDecision decision;
    decision.raw_text = raw;
    decision.replacements.reserve(candidate_count);
    for (const auto& entry : *arr) {
        if (entry.is_string() && entry.get<std::string>() == "keep") {
            decision.replacements.emplace_back(std::nullopt);
            continue;
        }
        auto point = coords_from_object(entry, dim_keys);
        if (!point) return std::nullopt;
        decision.replacements.emplace_back(std::move(point));
    }
    return decision;
}

} // namespace bbo
