#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "bbo/bbob.hpp"
#include "bbo/errors.hpp"
#include "bbo/rng.hpp"
#include "bbo/task.hpp"

using namespace bbo;

namespace {

// test-local RK4 for x'' + b x' + k x = 0, independent of the library path
std::vector<double> rk4_oracle(double k, double b, double h, int steps, int stride) {
    double x = 1.0, v = 0.0;
    std::vector<double> out;
    auto acc = [&](double xx, double vv) { return -b * vv - k * xx; };
    for (int s = 1; s <= steps; ++s) {
        const double k1x = v, k1v = acc(x, v);
        const double k2x = v + 0.5 * h * k1v, k2v = acc(x + 0.5 * h * k1x, v + 0.5 * h * k1v);
        const double k3x = v + 0.5 * h * k2v, k3v = acc(x + 0.5 * h * k2x, v + 0.5 * h * k2v);
        const double k4x = v + h * k3v, k4v = acc(x + h * k3x, v + h * k3v);
        x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
        v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        if (s % stride == 0) out.push_back(x);
    }
    return out;
}

double eval_at(const TaskSpec& task, std::initializer_list<double> coords) {
    std::vector<double> p(coords);
    return evaluate(task, p);
}

} // namespace

TEST_CASE("bounds validation and clamping") {
    const Bounds degenerate{{1.0}, {1.0}};
    CHECK_THROWS_AS(degenerate.validate(), ContractViolation);
    const Bounds empty{{}, {}};
    CHECK_THROWS_AS(empty.validate(), ContractViolation);
    const Bounds ragged{{0.0, 0.0}, {1.0}};
    CHECK_THROWS_AS(ragged.validate(), ContractViolation);

    const auto box = Bounds::box(2, -5.0, 5.0);
    const std::vector<double> inside{1.0, -2.0};
    CHECK(box.contains(inside));
    const std::vector<double> outside{6.0, -7.0};
    CHECK_FALSE(box.contains(outside));
    CHECK(box.clamp(outside) == std::vector<double>{5.0, -5.0});
    CHECK(box.volume() == doctest::Approx(100.0));
}

TEST_CASE("function tasks: ids, bounds, determinism") {
    const auto tasks = make_function_tasks(100, 7);
    REQUIRE(tasks.size() == 100);
    CHECK(tasks.front().id == "fn_000");
    CHECK(tasks.back().id == "fn_099");
    for (const auto& t : tasks) {
        CHECK(t.bounds == Bounds::box(2, 0.0, 1.0));
        CHECK(t.family == Family::Functions);
    }

    // same (count, master_seed) twice: identical loss at probed points
    const auto again = make_function_tasks(100, 7);
    Rng rng(11);
    for (int i = 0; i < 100; i += 17) {
        const std::vector<double> p{rng.uniform(), rng.uniform()};
        CHECK(evaluate(tasks[i], p) == evaluate(again[i], p));
    }
}

TEST_CASE("function task evaluates to the analytic mixture value") {
    const auto tasks = make_function_tasks(20, 7);
    for (const auto& task : tasks) {
        const auto bumps = function_task_bumps(task);
        REQUIRE(bumps.size() >= 3);
        REQUIRE(bumps.size() <= 8);

        // analytic mixture at the deepest center must match evaluate()
        const GaussianBump* deepest = &bumps[0];
        for (const auto& b : bumps)
            if (b.amplitude > deepest->amplitude) deepest = &b;

        double expected = 0.0, cross = 0.0;
        for (const auto& b : bumps) {
            const double dx = deepest->center[0] - b.center[0];
            const double dy = deepest->center[1] - b.center[1];
            const double term = -b.amplitude * std::exp(-(dx * dx + dy * dy) / (2 * b.width * b.width));
            expected += term;
            if (&b != deepest) cross += term;
        }
        CHECK(evaluate(task, deepest->center) == doctest::Approx(expected).epsilon(1e-12));
        // with negligible cross terms the value is the negated amplitude
        if (std::abs(cross) < 1e-9)
            CHECK(evaluate(task, deepest->center) == doctest::Approx(-deepest->amplitude).epsilon(1e-8));
    }
}

TEST_CASE("function tasks have several strict local minima on a fine grid") {
    const auto tasks = make_function_tasks(3, 7);
    const int n = 200;
    for (const auto& task : tasks) {
        std::vector<double> grid(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const std::vector<double> p{(i + 0.5) / n, (j + 0.5) / n};
                grid[static_cast<std::size_t>(i) * n + j] = evaluate(task, p);
            }
        int minima = 0;
        for (int i = 1; i + 1 < n; ++i)
            for (int j = 1; j + 1 < n; ++j) {
                const double v = grid[static_cast<std::size_t>(i) * n + j];
                bool strict = true;
                for (int di = -1; di <= 1 && strict; ++di)
                    for (int dj = -1; dj <= 1; ++dj) {
                        if (di == 0 && dj == 0) continue;
                        if (grid[static_cast<std::size_t>(i + di) * n + (j + dj)] <= v) {
                            strict = false;
                            break;
                        }
                    }
                minima += strict ? 1 : 0;
            }
        CHECK(minima >= 2);
    }
}

TEST_CASE("known optima are never beaten by random search") {
    int with_optimum = 0, without = 0;
    const auto tasks = make_function_tasks(100, 7);
    Rng rng(23);
    for (const auto& task : tasks) {
        if (!task.optimum_loss) {
            ++without;
            continue;
        }
        ++with_optimum;
        for (int i = 0; i < 20000; ++i) {
            const std::vector<double> p{rng.uniform(), rng.uniform()};
            CHECK(evaluate(task, p) >= *task.optimum_loss - 1e-9);
        }
    }
    // both catalog branches must occur
    CHECK(with_optimum > 0);
    CHECK(without > 0);

    for (int fid : bbob_function_ids()) {
        const auto task = bbob_task(fid, 1, 2);
        for (int i = 0; i < 20000; ++i) {
            const std::vector<double> p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
            REQUIRE(evaluate(task, p) >= *task.optimum_loss - 1e-9);
        }
    }
    const auto five_d = bbob_task(24, 1, 5);
    for (int i = 0; i < 10000; ++i) {
        std::vector<double> p(5);
        for (auto& v : p) v = rng.uniform(-5, 5);
        REQUIRE(evaluate(five_d, p) >= *five_d.optimum_loss - 1e-9);
    }
}

TEST_CASE("deep random search on the structurally shifted benchmark functions") {
    // the Schwefel, Gallagher and bi-Rastrigin landscapes have distant decoy
    // basins; a million samples each guard the recorded optimum value
    Rng rng(31337);
    for (int fid : {20, 21, 24}) {
        const auto task = bbob_task(fid, 1, 2);
        for (int i = 0; i < 1000000; ++i) {
            const std::vector<double> p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
            REQUIRE(task.evaluator(p) >= *task.optimum_loss - 1e-9);
        }
    }
}

TEST_CASE("physical tasks: hidden truth recovers zero loss") {
    const auto tasks = make_physical_tasks(10, 3);
    REQUIRE(tasks.size() == 10);
    CHECK(tasks.front().id == "ph_000");
    for (const auto& task : tasks) {
        const auto truth = physical_task_truth(task);
        CHECK(truth.k >= 0.5);
        CHECK(truth.k <= 10.0);
        CHECK(truth.b >= 0.05);
        CHECK(truth.b <= 2.0);
        CHECK(eval_at(task, {truth.k, truth.b}) <= 1e-12);
        CHECK(*task.optimum_loss == 0.0);

        // two calls at the same parameters agree exactly
        const double l1 = eval_at(task, {truth.k + 0.3, truth.b});
        const double l2 = eval_at(task, {truth.k + 0.3, truth.b});
        CHECK(l1 == l2);
    }
}

TEST_CASE("physical loss is positive away from the truth, per an independent integrator") {
    const auto task = make_physical_tasks(3, 3)[1];
    const auto truth = physical_task_truth(task);

    const auto hidden = rk4_oracle(truth.k, truth.b, 0.01, 1000, 10);
    const auto perturbed = rk4_oracle(truth.k + 0.5, truth.b, 0.01, 1000, 10);
    double mse = 0.0;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        const double d = perturbed[i] - hidden[i];
        mse += d * d;
    }
    mse /= static_cast<double>(hidden.size());

    CHECK(mse > 0.0);
    CHECK(eval_at(task, {truth.k + 0.5, truth.b}) == doctest::Approx(mse).epsilon(1e-12));
}

TEST_CASE("trajectory integration matches the closed-form underdamped solution") {
    const double k = 4.0, b = 0.4;
    const auto samples = oscillator_trajectory(k, b);
    REQUIRE(samples.size() == 100);
    const double omega = std::sqrt(k - b * b / 4.0);
    for (int j = 0; j < 100; ++j) {
        const double t = 0.1 * (j + 1);
        const double expected =
            std::exp(-b * t / 2.0) * (std::cos(omega * t) + b / (2.0 * omega) * std::sin(omega * t));
        CHECK(samples[static_cast<std::size_t>(j)] == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("benchmark functions evaluate to the offset at their optimum") {
    for (int fid : bbob_function_ids()) {
        for (int instance : {1, 2}) {
            const auto task = bbob_task(fid, instance, 2);
            const auto x_opt = bbob_task_optimum(task);
            CHECK(evaluate(task, x_opt) == doctest::Approx(*task.optimum_loss).epsilon(1e-9));
        }
        const auto task5 = bbob_task(fid, 1, 5);
        CHECK(evaluate(task5, bbob_task_optimum(task5)) ==
              doctest::Approx(*task5.optimum_loss).epsilon(1e-9));
    }
}

TEST_CASE("sphere instance matches the quadratic closed form") {
    const auto task = bbob_task(1, 1, 2);
    const auto x_opt = bbob_task_optimum(task);
    const double f_opt = *task.optimum_loss;

    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const double dx = p[0] - x_opt[0], dy = p[1] - x_opt[1];
        CHECK(evaluate(task, p) == doctest::Approx(f_opt + dx * dx + dy * dy).epsilon(1e-12));
    }
    const std::vector<double> shifted{x_opt[0] + 1.0, x_opt[1]};
    CHECK(evaluate(task, shifted) == doctest::Approx(f_opt + 1.0).epsilon(1e-12));
}

TEST_CASE("distinct instances differ at each other's optimum") {
    for (int fid : bbob_function_ids()) {
        const auto a = bbob_task(fid, 1, 2);
        const auto b = bbob_task(fid, 2, 2);
        const auto b_opt = bbob_task_optimum(b);
        CHECK(std::abs(evaluate(a, b_opt) - *a.optimum_loss) > 1e-6);
    }
}

TEST_CASE("task evaluation edge cases") {
    const auto task = bbob_task(1, 1, 2);

    SUBCASE("out-of-bounds queries clamp to the box edge") {
        bool clamped = false;
        const double at_edge = eval_at(task, {5.0, 5.0});
        const std::vector<double> outside{6.0, 6.0};
        CHECK(evaluate(task, outside, &clamped) == at_edge);
        CHECK(clamped);
        bool unclamped = true;
        const std::vector<double> inside{1.0, 1.0};
        evaluate(task, inside, &unclamped);
        CHECK_FALSE(unclamped);
    }
    SUBCASE("non-finite coordinates are rejected") {
        const std::vector<double> nan_point{std::nan(""), 0.0};
        CHECK_THROWS_AS(evaluate(task, nan_point), InvalidPoint);
        const std::vector<double> inf_point{std::numeric_limits<double>::infinity(), 0.0};
        CHECK_THROWS_AS(evaluate(task, inf_point), InvalidPoint);
    }
    SUBCASE("dimension mismatch is a contract violation") {
        const std::vector<double> wrong{1.0, 2.0, 3.0};
        CHECK_THROWS_AS(evaluate(task, wrong), ContractViolation);
    }
    SUBCASE("unknown function ids are rejected") {
        CHECK_THROWS_AS(bbob_task(2, 1, 2), UnsupportedFunction);
        CHECK_THROWS_AS(bbob_task(1, 1, 3), ContractViolation);
        CHECK_THROWS_AS(bbob_task(1, 0, 2), ContractViolation);
    }
}

TEST_CASE("default catalogs keep every function present when truncated") {
    const auto tasks = make_bbob_tasks(2, 48);
    REQUIRE(tasks.size() == 48);
    std::set<std::string> ids;
    int instance1 = 0;
    for (const auto& t : tasks) {
        CHECK(ids.insert(t.id).second); // unique
        if (t.id.ends_with("_i1")) ++instance1;
    }
    CHECK(instance1 == static_cast<int>(bbob_function_ids().size()));
}

TEST_CASE("probe sphere task") {
    const auto task = make_probe_sphere_task(4);
    CHECK(task.bounds == Bounds::box(2, 0.0, 1.0));
    CHECK(*task.optimum_loss == 0.0);
    // the minimum is interior: a fine grid should find a very small loss
    double best = 1e18;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) best = std::min(best, eval_at(task, {i / 99.0, j / 99.0}));
    CHECK(best < 1e-3);
}
