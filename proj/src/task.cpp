#include "bbo/task.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bbo/errors.hpp"
#include "bbo/rng.hpp"

namespace bbo {

std::string family_name(Family f) {
    switch (f) {
    case Family::Functions: return "functions";
    case Family::Physical: return "physical";
    case Family::Bbob2d: return "bbob2d";
    case Family::Bbob5d: return "bbob5d";
    }
    throw ContractViolation("family_name: unknown family");
}

double evaluate(const TaskSpec& task, std::span<const double> point, bool* was_clamped) {
    if (static_cast<int>(point.size()) != task.dim())
        throw ContractViolation("evaluate: point dimension mismatch for task " + task.id);
    for (double v : point)
        if (!std::isfinite(v)) throw InvalidPoint("evaluate: non-finite coordinate for task " + task.id);

    const auto clamped = task.bounds.clamp(point);
    if (was_clamped) {
        *was_clamped = !std::equal(clamped.begin(), clamped.end(), point.begin());
    }
    return task.evaluator(clamped);
}

// --- Functions family -------------------------------------------------------

namespace {

std::vector<GaussianBump> generate_bumps(std::uint64_t task_seed) {
    Rng rng(task_seed);
    const int m = rng.uniform_int(3, 8);

    // Centers kept pairwise separated so each bump carries its own basin.
    double min_sep = 0.15;
    std::vector<std::vector<double>> centers;
    int attempts = 0;
    while (static_cast<int>(centers.size()) < m) {
        std::vector<double> c{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
        bool ok = true;
        for (const auto& prev : centers) {
            const double dx = c[0] - prev[0], dy = c[1] - prev[1];
            if (std::sqrt(dx * dx + dy * dy) < min_sep) {
                ok = false;
                break;
            }
        }
        if (ok) {
            centers.push_back(std::move(c));
        } else if (++attempts % 500 == 0) {
            min_sep *= 0.95;
        }
    }

    double d_min = 1e9;
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            const double dx = centers[i][0] - centers[j][0];
            const double dy = centers[i][1] - centers[j][1];
            d_min = std::min(d_min, std::sqrt(dx * dx + dy * dy));
        }

    const double width_cap = std::min(0.12, d_min / 3.2);
    std::vector<GaussianBump> bumps;
    bumps.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        GaussianBump b;
        b.center = centers[static_cast<std::size_t>(i)];
        b.amplitude = rng.uniform(0.3, 1.0);
        b.width = rng.uniform(0.04, width_cap);
        bumps.push_back(std::move(b));
    }
    return bumps;
}

double mixture_loss(const std::vector<GaussianBump>& bumps, std::span<const double> x) {
    double s = 0.0;
    for (const auto& b : bumps) {
        const double dx = x[0] - b.center[0], dy = x[1] - b.center[1];
        s -= b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.width * b.width));
    }
    return s;
}

std::vector<double> mixture_grad(const std::vector<GaussianBump>& bumps, std::span<const double> x) {
    std::vector<double> g{0.0, 0.0};
    for (const auto& b : bumps) {
        const double dx = x[0] - b.center[0], dy = x[1] - b.center[1];
        const double e = b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.width * b.width)) /
                         (b.width * b.width);
        g[0] += e * dx;
        g[1] += e * dy;
    }
    return g;
}

// Gradient descent with backtracking from a bump center; the basins are
// smooth, so this converges far below the 1e-9 tolerance the catalog promises.
double polish_minimum(const std::vector<GaussianBump>& bumps, std::vector<double> x) {
    double fx = mixture_loss(bumps, x);
    for (int it = 0; it < 200; ++it) {
        const auto g = mixture_grad(bumps, x);
        const double gnorm = std::sqrt(g[0] * g[0] + g[1] * g[1]);
        if (gnorm < 1e-13) break;
        double step = 0.01;
        bool moved = false;
        for (int bt = 0; bt < 40; ++bt) {
            std::vector<double> y{x[0] - step * g[0], x[1] - step * g[1]};
            const double fy = mixture_loss(bumps, y);
            if (fy < fx) {
                x = std::move(y);
                fx = fy;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return fx;
}

bool well_separated(const std::vector<GaussianBump>& bumps) {
    double max_width = 0.0;
    for (const auto& b : bumps) max_width = std::max(max_width, b.width);
    for (std::size_t i = 0; i < bumps.size(); ++i)
        for (std::size_t j = i + 1; j < bumps.size(); ++j) {
            const double dx = bumps[i].center[0] - bumps[j].center[0];
            const double dy = bumps[i].center[1] - bumps[j].center[1];
            if (std::sqrt(dx * dx + dy * dy) < 4.0 * max_width) return false;
        }
    return true;
}

std::uint64_t function_task_seed(std::uint64_t master_seed, int index) {
    return hash_combine(hash_combine(stable_hash("functions"), master_seed),
                        static_cast<std::uint64_t>(index));
}

} // namespace

std::vector<TaskSpec> make_function_tasks(int count, std::uint64_t master_seed) {
    if (count < 1) throw ContractViolation("make_function_tasks: count must be >= 1");
    std::vector<TaskSpec> tasks;
    tasks.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const std::uint64_t seed = function_task_seed(master_seed, i);
        auto bumps = generate_bumps(seed);

        TaskSpec task;
        char id[32];
        std::snprintf(id, sizeof id, "fn_%03d", i);
        task.id = id;
        task.family = Family::Functions;
        task.bounds = Bounds::box(2, 0.0, 1.0);
        task.seed = seed;
        task.keys = {"x", "y"};
        if (well_separated(bumps)) {
            double best = 0.0;
            for (const auto& b : bumps) best = std::min(best, polish_minimum(bumps, b.center));
            task.optimum_loss = best;
        }
        task.evaluator = [bumps](std::span<const double> x) { return mixture_loss(bumps, x); };
        tasks.push_back(std::move(task));
    }
    return tasks;
}

std::vector<GaussianBump> function_task_bumps(const TaskSpec& task) {
    if (task.family != Family::Functions || task.id.rfind("fn_", 0) != 0)
        throw ContractViolation("function_task_bumps: not a generated function task: " + task.id);
    return generate_bumps(task.seed);
}

// --- Physical family --------------------------------------------------------

namespace {

constexpr double kTimeHorizon = 10.0;
constexpr double kRk4Step = 0.01;
constexpr int kSampleCount = 100;

OscillatorTruth truth_from_seed(std::uint64_t task_seed) {
    Rng rng(task_seed);
    // hidden truth drawn from the inner 80% of each bound
    OscillatorTruth t;
    t.k = rng.uniform(0.5 + 0.1 * 9.5, 10.0 - 0.1 * 9.5);
    t.b = rng.uniform(0.05 + 0.1 * 1.95, 2.0 - 0.1 * 1.95);
    return t;
}

std::uint64_t physical_task_seed(std::uint64_t master_seed, int index) {
    return hash_combine(hash_combine(stable_hash("physical"), master_seed),
                        static_cast<std::uint64_t>(index));
}

} // namespace

std::vector<double> oscillator_trajectory(double k, double b) {
    // x'' + b x' + k x = 0, x(0)=1, x'(0)=0; sample every 10th RK4 step
    double x = 1.0, v = 0.0;
    const int steps = static_cast<int>(std::lround(kTimeHorizon / kRk4Step));
    const int stride = steps / kSampleCount;
    std::vector<double> samples;
    samples.reserve(kSampleCount);

    auto accel = [k, b](double xx, double vv) { return -b * vv - k * xx; };
    for (int s = 1; s <= steps; ++s) {
        const double k1x = v, k1v = accel(x, v);
        const double k2x = v + 0.5 * kRk4Step * k1v, k2v = accel(x + 0.5 * kRk4Step * k1x, v + 0.5 * kRk4Step * k1v);
        const double k3x = v + 0.5 * kRk4Step * k2v, k3v = accel(x + 0.5 * kRk4Step * k2x, v + 0.5 * kRk4Step * k2v);
        const double k4x = v + kRk4Step * k3v, k4v = accel(x + kRk4Step * k3x, v + kRk4Step * k3v);
        x += kRk4Step / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += kRk4Step / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (s % stride == 0) samples.push_back(x);
    }
    return samples;
}

std::vector<TaskSpec> make_physical_tasks(int count, std::uint64_t master_seed) {
    if (count < 1) throw ContractViolation("make_physical_tasks: count must be >= 1");
    std::vector<TaskSpec> tasks;
    tasks.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const std::uint64_t seed = physical_task_seed(master_seed, i);
        const auto truth = truth_from_seed(seed);
        const auto hidden = oscillator_trajectory(truth.k, truth.b);

        TaskSpec task;
        char id[32];
        std::snprintf(id, sizeof id, "ph_%03d", i);
        task.id = id;
        task.family = Family::Physical;
        task.bounds.lower = {0.5, 0.05};
        task.bounds.upper = {10.0, 2.0};
        task.seed = seed;
        task.optimum_loss = 0.0;
        task.keys = {"k", "b"};
        task.evaluator = [hidden](std::span<const double> p) {
            const auto cand = oscillator_trajectory(p[0], p[1]);
            double mse = 0.0;
            for (int j = 0; j < kSampleCount; ++j) {
                const double d = cand[static_cast<std::size_t>(j)] - hidden[static_cast<std::size_t>(j)];
                mse += d * d;
            }
            return mse / kSampleCount;
        };
        tasks.push_back(std::move(task));
    }
    return tasks;
}

OscillatorTruth physical_task_truth(const TaskSpec& task) {
    if (task.family != Family::Physical)
        throw ContractViolation("physical_task_truth: not a physical task: " + task.id);
    return truth_from_seed(task.seed);
}

// --- Probe sphere -----------------------------------------------------------

TaskSpec make_probe_sphere_task(std::uint64_t seed) {
    Rng rng(hash_combine(stable_hash("probe_sphere"), seed));
    const std::vector<double> center{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)};

    TaskSpec task;
    char id[32];
    std::snprintf(id, sizeof id, "sphere_%03d", static_cast<int>(seed % 1000));
    task.id = id;
    task.family = Family::Functions;
    task.bounds = Bounds::box(2, 0.0, 1.0);
    task.seed = seed;
    task.optimum_loss = 0.0;
    task.keys = {"x", "y"};
    task.evaluator = [center](std::span<const double> x) {
        const double dx = x[0] - center[0], dy = x[1] - center[1];
        return dx * dx + dy * dy;
    };
    return task;
}

} // namespace bbo
