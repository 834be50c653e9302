#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bbo/backend.hpp"
#include "bbo/proposer.hpp"
#include "bbo/task.hpp"

namespace bbo {

/// Tree node. `value` is the minimum loss observed anywhere in the subtree,
/// maintained incrementally; `visits` counts backpropagations through the
/// node. The root carries no point.
struct MctsNode {
    int id = 0;
    std::optional<int> parent;
    std::optional<std::vector<double>> point;
    std::optional<double> loss;
    int visits = 0;
    double value = std::numeric_limits<double>::infinity();
    std::vector<int> children;
};

struct MctsConfig {
    int k = 5;                       // children per expansion
    double c = std::sqrt(2.0);       // UCB1 exploration constant
    int budget = 50;
};

/// UCB1 with losses min-max normalized into rewards: unvisited nodes score
/// +inf; a degenerate scale (hi <= lo) pins the reward at 0.5.
double ucb1_score(const MctsNode& node, int parent_visits, double c,
                  std::pair<double, double> loss_scale);

class MctsTree {
public:
    MctsTree();

    const MctsNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    const std::vector<MctsNode>& nodes() const { return nodes_; }
    int root_id() const { return 0; }

    /// Root-to-node path as history observations (root excluded).
    std::vector<Observation> path_history(int id) const;

    /// Selection: descend from the root along max-UCB1 children (first on
    /// ties) until a node with fewer than k children is reached.
    int select(int k, double c) const;

    int attach_child(int parent_id, std::vector<double> point, double loss);

    /// visits += 1 and value = min(value, best_child_loss) for the expanded
    /// node and every ancestor.
    void backpropagate(int expanded_id, double best_child_loss);

    std::pair<double, double> loss_scale() const { return {loss_lo_, loss_hi_}; }

    /// Checks the value/visits invariants over the whole tree; throws
    /// ContractViolation on the first violation.
    void audit() const;

private:
    std::vector<MctsNode> nodes_;
    double loss_lo_ = std::numeric_limits<double>::infinity();
    double loss_hi_ = -std::numeric_limits<double>::infinity();
};

/// Result of one expansion (at most k observations, truncated by budget).
struct MctsExpansion {
    int node_id = 0;
    std::vector<Observation> observations;
    std::vector<bool> fallback;
    std::vector<bool> clamped;
    std::vector<std::string> raw_texts;
};

/// Expands `node_id`: renders the family prompt whose history block is
/// exactly the root-to-node path plus the global best-so-far, requests
/// min(k, remaining) completions through the backend's batch path, parses
/// (per-child parse failures fall back to uniform in-bounds samples),
/// evaluates, attaches children and backpropagates the minimum child loss.
MctsExpansion mcts_expand(MctsTree& tree, int node_id, Backend& backend, const TaskSpec& task,
                          const MctsConfig& config, int remaining_budget, int next_step,
                          double global_best, Rng& rng, const RequestOptions& opts);

/// Full run under the evaluation budget.
struct MctsRun {
    MctsTree tree;
    std::vector<Observation> observations;
    std::vector<bool> fallback;
    std::vector<bool> clamped;
    std::vector<std::string> raw_texts;
};
MctsRun run_mcts(const TaskSpec& task, Backend& backend, const MctsConfig& config, Rng& rng,
                 const RequestOptions& opts);

} // namespace bbo
