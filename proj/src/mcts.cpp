#include "bbo/mcts.hpp"

#include <algorithm>
#include <limits>

#include "bbo/errors.hpp"

namespace bbo {

double ucb1_score(const MctsNode& node, int parent_visits, double c,
                  std::pair<double, double> loss_scale) {
    if (parent_visits < node.visits)
        throw ContractViolation("ucb1_score: parent_visits < node.visits");
    if (node.visits == 0) return std::numeric_limits<double>::infinity();

    const auto [lo, hi] = loss_scale;
    const double reward = hi <= lo ? 0.5 : (hi - node.value) / (hi - lo);
    return reward + c * std::sqrt(std::log(static_cast<double>(parent_visits)) / node.visits);
}

MctsTree::MctsTree() {
    nodes_.push_back(MctsNode{});
}

std::vector<Observation> MctsTree::path_history(int id) const {
    std::vector<Observation> path;
    int cursor = id;
    while (cursor != root_id()) {
        const auto& n = nodes_[static_cast<std::size_t>(cursor)];
        path.push_back({0, *n.point, *n.loss});
        cursor = *n.parent;
    }
    std::reverse(path.begin(), path.end());
    for (std::size_t i = 0; i < path.size(); ++i) path[i].step = static_cast<int>(i) + 1;
    return path;
}

int MctsTree::select(int k, double c) const {
    int cursor = root_id();
    while (static_cast<int>(nodes_[static_cast<std::size_t>(cursor)].children.size()) >= k) {
        const auto& current = nodes_[static_cast<std::size_t>(cursor)];
        int best_child = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int child_id : current.children) {
            const double score =
                ucb1_score(nodes_[static_cast<std::size_t>(child_id)], current.visits, c, loss_scale());
            if (score > best_score) { // strict: ties keep the first child
                best_score = score;
                best_child = child_id;
            }
        }
        cursor = best_child;
    }
    return cursor;
}

int MctsTree::attach_child(int parent_id, std::vector<double> point, double loss) {
    MctsNode child;
    child.id = static_cast<int>(nodes_.size());
    child.parent = parent_id;
    child.point = std::move(point);
    child.loss = loss;
    child.value = loss;
    nodes_.push_back(std::move(child));
    nodes_[static_cast<std::size_t>(parent_id)].children.push_back(static_cast<int>(nodes_.size()) - 1);
    loss_lo_ = std::min(loss_lo_, loss);
    loss_hi_ = std::max(loss_hi_, loss);
    return static_cast<int>(nodes_.size()) - 1;
}

void MctsTree::backpropagate(int expanded_id, double best_child_loss) {
    std::optional<int> cursor = expanded_id;
    while (cursor) {
        auto& n = nodes_[static_cast<std::size_t>(*cursor)];
        n.visits += 1;
        n.value = std::min(n.value, best_child_loss);
        cursor = n.parent;
    }
}

void MctsTree::audit() const {
    for (const auto& n : nodes_) {
        // value must equal the minimum loss in the subtree
        double expected = n.loss ? *n.loss : std::numeric_limits<double>::infinity();
        std::vector<int> stack(n.children.begin(), n.children.end());
        while (!stack.empty()) {
            const auto& d = nodes_[static_cast<std::size_t>(stack.back())];
            stack.pop_back();
            if (d.loss) expected = std::min(expected, *d.loss);
            stack.insert(stack.end(), d.children.begin(), d.children.end());
        }
        if (n.value != expected)
            throw ContractViolation("mcts audit: node value is not the subtree minimum");
        if (n.parent && nodes_[static_cast<std::size_t>(*n.parent)].visits < n.visits)
            throw ContractViolation("mcts audit: child visited more often than its parent");
    }
}

MctsExpansion mcts_expand(MctsTree& tree, int node_id, Backend& backend, const TaskSpec& task,
                          const MctsConfig& config, int remaining_budget, int next_step,
                          double global_best, Rng& rng, const RequestOptions& opts) {
    if (remaining_budget < 1) throw ContractViolation("mcts_expand: no budget remaining");
    const int n_children = std::min(config.k, remaining_budget);

    ProposerContext ctx;
    ctx.template_kind = template_for_family(task.family);
    ctx.keys = task.keys;
    ctx.bounds = task.bounds;
    ctx.history = tree.path_history(node_id);
    ctx.trial_num = next_step;
    // the prompt's best-loss line carries the global best, not the path best
    ctx.best_loss_override = global_best;
    const std::string prompt = render_prompt(ctx);

    MctsExpansion expansion;
    expansion.node_id = node_id;

    const auto responses = backend.complete_batch(opts.make(prompt), n_children);

    auto path_points = ctx.history;
    double best_child_loss = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_children; ++i) {
        const auto& raw = responses[static_cast<std::size_t>(i)].text;
        expansion.raw_texts.push_back(raw);

        auto outcome = parse_proposal(raw, ctx.keys, ctx.bounds, path_points);
        std::vector<double> point;
        bool fallback = false;
        bool clamped = false;
        if (outcome.ok()) {
            point = outcome.proposal->point;
            clamped = outcome.proposal->clamped;
        } else {
            fallback = true;
            for (int attempt = 0; attempt < 1000; ++attempt) {
                std::vector<double> p(static_cast<std::size_t>(task.dim()));
                for (int d = 0; d < task.dim(); ++d)
                    p[static_cast<std::size_t>(d)] =
                        rng.uniform(task.bounds.lower[static_cast<std::size_t>(d)],
                                    task.bounds.upper[static_cast<std::size_t>(d)]);
                const bool repeat = std::any_of(path_points.begin(), path_points.end(),
                                                [&](const Observation& o) { return o.point == p; });
                if (!repeat) {
                    point = std::move(p);
                    break;
                }
            }
            if (point.empty()) throw ContractViolation("mcts_expand: fallback sampling failed");
        }

        const double loss = evaluate(task, point);
        tree.attach_child(node_id, point, loss);
        best_child_loss = std::min(best_child_loss, loss);

        expansion.observations.push_back({next_step + i, std::move(point), loss});
        expansion.fallback.push_back(fallback);
        expansion.clamped.push_back(clamped);
    }

    tree.backpropagate(node_id, best_child_loss);
    return expansion;
}

MctsRun run_mcts(const TaskSpec& task, Backend& backend, const MctsConfig& config, Rng& rng,
                 const RequestOptions& opts) {
    if (config.k < 1) throw ContractViolation("run_mcts: k must be >= 1");
    if (config.c < 0.0) throw ContractViolation("run_mcts: c must be >= 0");
    if (config.budget < 1) throw ContractViolation("run_mcts: budget must be >= 1");

    MctsRun run;
    double global_best = std::numeric_limits<double>::infinity();
    int evaluated = 0;
    while (evaluated < config.budget) {
        const int target = run.tree.select(config.k, config.c);
        auto expansion = mcts_expand(run.tree, target, backend, task, config,
                                     config.budget - evaluated, evaluated + 1, global_best, rng, opts);
        for (std::size_t i = 0; i < expansion.observations.size(); ++i) {
            global_best = std::min(global_best, expansion.observations[i].loss);
            run.observations.push_back(std::move(expansion.observations[i]));
            run.fallback.push_back(expansion.fallback[i]);
            run.clamped.push_back(expansion.clamped[i]);
            run.raw_texts.push_back(std::move(expansion.raw_texts[i]));
        }
        evaluated += static_cast<int>(expansion.fallback.size());
    }
    return run;
}

} // namespace bbo
