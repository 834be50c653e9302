#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bbo/bounds.hpp"

namespace bbo {

enum class Family { Functions, Physical, Bbob2d, Bbob5d };

std::string family_name(Family f);

/// One observed trial: 1-indexed step, queried point, scalar loss.
struct Observation {
    int step = 0;
    std::vector<double> point;
    double loss = 0.0;

    bool operator==(const Observation&) const = default;
};

/// A benchmark objective. Evaluation is a pure function of (id, seed, point):
/// the evaluator closure captures all instance data by value and touches no
/// global state, so it is safe to call from any number of threads.
struct TaskSpec {
    std::string id;
    Family family = Family::Functions;
    Bounds bounds;
    std::uint64_t seed = 0;
    std::optional<double> optimum_loss;

    /// Prompt key per axis: {"x","y"} / {"k","b"} / {"x0","x1",...}.
    std::vector<std::string> keys;

    std::function<double(std::span<const double>)> evaluator;

    int dim() const { return bounds.dim(); }
};

/// Evaluates a task at a point. Non-finite coordinates throw InvalidPoint;
/// out-of-bounds points are clamped componentwise first. `was_clamped`, when
/// given, reports whether clamping changed the point so callers can flag the
/// trial in the run trace.
double evaluate(const TaskSpec& task, std::span<const double> point, bool* was_clamped = nullptr);

/// Synthetic 2D functions on [0,1]^2: seeded mixtures of negated Gaussian
/// bumps with several strict local minima. ids "fn_000"...
std::vector<TaskSpec> make_function_tasks(int count, std::uint64_t master_seed);

/// 2D parameter identification: hidden damped oscillator, MSE trajectory
/// loss over (stiffness k, damping b). ids "ph_000"...
std::vector<TaskSpec> make_physical_tasks(int count, std::uint64_t master_seed);

/// Shifted 2D sphere on [0,1]^2 used by the anchoring probe and sanity
/// checks; optimum loss 0 at a seeded interior point.
TaskSpec make_probe_sphere_task(std::uint64_t seed);

/// Parameters of the Functions family generator, exposed for tests.
struct GaussianBump {
    std::vector<double> center;
    double amplitude = 0.0; // bump depth, loss at an isolated center is -amplitude
    double width = 0.0;     // isotropic standard deviation
};

/// The bump set a Functions task was built from (re-derived from the seed).
std::vector<GaussianBump> function_task_bumps(const TaskSpec& task);

/// Physical-family ground truth, exposed for tests.
struct OscillatorTruth {
    double k = 0.0;
    double b = 0.0;
};
OscillatorTruth physical_task_truth(const TaskSpec& task);

/// Fixed-step RK4 integration of x'' + b x' + k x = 0, x(0)=1, x'(0)=0,
/// sampled at the 100 uniform times used by the loss.
std::vector<double> oscillator_trajectory(double k, double b);

} // namespace bbo
