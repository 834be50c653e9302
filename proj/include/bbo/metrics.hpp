#pragma once

#include <optional>
#include <tuple>
#include <vector>

#include "bbo/bounds.hpp"

namespace bbo {

/// The queried points and losses of one run, in query order.
struct Trajectory {
    std::vector<std::vector<double>> points;
    std::vector<double> losses;
    Bounds bounds;

    int length() const { return static_cast<int>(points.size()); }
    void validate() const;
};

/// Derived per-run metrics.
struct MetricSummary {
    int best_step = 0;     // 1-indexed trial where the minimum is first attained
    double best_loss = 0.0;
    std::vector<std::pair<int, double>> coverage_series; // (k, Cov_k percent) at k = 5,10,...
    std::optional<double> norm_traj_length;
    int clamped_count = 0;
    int fallback_count = 0;
};

/// 1-indexed first trial attaining the minimum loss.
int best_step(const Trajectory& traj);

/// Cov_k: volume of the centroid-centered bounding ball of the first k
/// queries over the domain volume, as a percentage clipped to 100.
/// Uses the disk area for d = 2 and the d-ball volume for higher dimensions.
double coverage(const Trajectory& traj, int k);

/// Cov_k evaluated at k = 5, 10, ..., up to the trajectory length.
std::vector<std::pair<int, double>> coverage_dynamics(const Trajectory& traj);

/// End-to-end displacement over total path length, in (0, 1]. Empty when the
/// total path length is below 1e-12 (degenerate run, reported rather than
/// defaulted).
std::optional<double> norm_traj_length(const Trajectory& traj);

/// Pairwise win counts over a shared task catalog: strictly smaller best loss
/// wins, exact ties land in the third bucket.
struct WinCounts {
    int a_wins = 0;
    int b_wins = 0;
    int ties = 0;
};
WinCounts pairwise_wins(const std::vector<double>& a_best, const std::vector<double>& b_best);

/// Full per-run summary (coverage series plus scalars).
MetricSummary summarize(const Trajectory& traj, int clamped_count = 0, int fallback_count = 0);

} // namespace bbo
