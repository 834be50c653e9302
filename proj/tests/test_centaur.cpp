#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bbo/centaur.hpp"
#include "bbo/errors.hpp"
#include "bbo/runner.hpp"
#include "bbo/scripted.hpp"

using namespace bbo;

namespace {

// locates the task minimum numerically (coarse grid + descent polish)
std::vector<double> locate_optimum(const TaskSpec& task) {
    std::vector<double> best{0.5, 0.5};
    double best_loss = 1e18;
    for (int i = 0; i < 200; ++i)
        for (int j = 0; j < 200; ++j) {
            const std::vector<double> p{(i + 0.5) / 200, (j + 0.5) / 200};
            const double l = evaluate(task, p);
            if (l < best_loss) {
                best_loss = l;
                best = p;
            }
        }
    for (int it = 0; it < 300; ++it) {
        const double e = 1e-7;
        std::vector<double> g(2);
        for (int d = 0; d < 2; ++d) {
            auto hi = best, lo = best;
            hi[static_cast<std::size_t>(d)] += e;
            lo[static_cast<std::size_t>(d)] -= e;
            g[static_cast<std::size_t>(d)] = (evaluate(task, hi) - evaluate(task, lo)) / (2 * e);
        }
        best[0] -= 0.25 * g[0];
        best[1] -= 0.25 * g[1];
    }
    return best;
}

} // namespace

TEST_CASE("keep-all override reproduces the plain optimizer bit for bit") {
    const auto task = make_probe_sphere_task(3);
    RunConfig config;
    config.budget = 50;

    KeepAllBackend backend(1);
    const auto plain = run_single(task, "cma", 0, 4242, backend, config);
    const auto hybrid = run_single(task, "centaur", 0, 4242, backend, config);

    CHECK(plain.points == hybrid.points);
    CHECK(plain.losses == hybrid.losses);
    CHECK(plain.entropy_series == hybrid.entropy_series);
    CHECK(plain.metrics.best_step == hybrid.metrics.best_step);
    CHECK(plain.metrics.best_loss == hybrid.metrics.best_loss);
    for (const auto& f : hybrid.flags) {
        CHECK_FALSE(f.injected);
        CHECK_FALSE(f.fallback);
    }
    CHECK(plain.method == "cma");
    CHECK(hybrid.method == "centaur");
}

TEST_CASE("an oracle override reaches the optimum within one generation") {
    const auto task = make_probe_sphere_task(5);
    const auto x_star = locate_optimum(task);
    OracleOverrideBackend backend(x_star);

    auto state = cma_init(2, task.bounds, 7);
    Rng rng(8);
    const auto step = centaur_step(state, backend, task, {}, 50, 1, rng, {});

    REQUIRE_FALSE(step.observations.empty());
    CHECK(step.injected[0]);
    double best = 1e18;
    for (const auto& obs : step.observations) best = std::min(best, obs.loss);
    CHECK(best <= *task.optimum_loss + 1e-9);

    // the tell recentered toward the injected optimum
    double before = 0, after = 0;
    for (int d = 0; d < 2; ++d) {
        before += std::pow(state.mean[static_cast<std::size_t>(d)] - x_star[static_cast<std::size_t>(d)], 2);
        after += std::pow(step.state.mean[static_cast<std::size_t>(d)] - x_star[static_cast<std::size_t>(d)], 2);
    }
    CHECK(after < before);
}

TEST_CASE("out-of-bounds replacements are clamped before evaluation") {
    const auto task = make_probe_sphere_task(5);
    OracleOverrideBackend backend({2.0, 2.0}); // outside [0,1]^2

    auto state = cma_init(2, task.bounds, 9);
    Rng rng(10);
    const auto step = centaur_step(state, backend, task, {}, 50, 1, rng, {});
    CHECK(step.injected[0]);
    CHECK(step.clamped[0]);
    CHECK(step.observations[0].point == std::vector<double>{1.0, 1.0});
    const std::vector<double> corner{1.0, 1.0};
    CHECK(step.observations[0].loss == evaluate(task, corner));
}

TEST_CASE("unusable override replies degrade to keep-all for the generation") {
    const auto task = make_probe_sphere_task(3);
    RunConfig config;
    config.budget = 24;

    MockBackend garbage({"definitely not a json array"}, true);
    const auto degraded = run_single(task, "centaur", 0, 777, garbage, config);
    KeepAllBackend keeper(1);
    const auto kept = run_single(task, "centaur", 0, 777, keeper, config);

    CHECK(degraded.points == kept.points);
    CHECK(degraded.losses == kept.losses);
    bool logged = false;
    for (const auto& entry : degraded.raw_texts)
        if (entry.at("parse_failed").get<bool>()) logged = true;
    CHECK(logged);
}

TEST_CASE("budget is exact across generation misalignment") {
    const auto task = make_probe_sphere_task(3);
    RunConfig config;
    config.budget = 50; // lambda = 6: 8 full generations plus a partial of 2

    KeepAllBackend backend(1);
    const auto record = run_single(task, "centaur", 0, 11, backend, config);
    CHECK(record.points.size() == 50);
    CHECK(record.losses.size() == 50);
    CHECK(record.raw_texts.size() == 9); // ceil(50 / 6) override rounds
    CHECK(record.entropy_series.size() == 10); // initial + one per tell
}

TEST_CASE("injected flags reach the rank-based update") {
    const auto task = make_probe_sphere_task(5);
    const auto x_star = locate_optimum(task);
    RunConfig config;
    config.budget = 12;

    OracleOverrideBackend oracle(x_star);
    const auto record = run_single(task, "centaur", 0, 13, oracle, config);
    int injected = 0;
    for (const auto& f : record.flags) injected += f.injected ? 1 : 0;
    CHECK(injected >= 1); // candidate 0 of the first generation, at least
    CHECK(record.metrics.best_loss <= *task.optimum_loss + 1e-9);
}
