#include "bbo/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "bbo/errors.hpp"

namespace bbo {

namespace {

constexpr double kPi = 3.14159265358979323846;

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Volume of the d-ball of radius r.
double ball_volume(int d, double r) {
    if (d == 2) return kPi * r * r;
    const double half = d / 2.0;
    return std::pow(kPi, half) / std::tgamma(half + 1.0) * std::pow(r, d);
}

} // namespace

void Trajectory::validate() const {
    if (points.empty() || points.size() != losses.size())
        throw ContractViolation("Trajectory: points/losses must be non-empty and equal length");
    for (const auto& p : points)
        if (static_cast<int>(p.size()) != bounds.dim())
            throw ContractViolation("Trajectory: point dimension mismatch");
}

int best_step(const Trajectory& traj) {
    traj.validate();
    int best = 0;
    for (int i = 1; i < traj.length(); ++i)
        if (traj.losses[static_cast<std::size_t>(i)] < traj.losses[static_cast<std::size_t>(best)]) best = i;
    return best + 1;
}

double coverage(const Trajectory& traj, int k) {
    traj.validate();
    if (k < 1 || k > traj.length())
        throw ContractViolation("coverage: k out of range");

    const int d = traj.bounds.dim();
    std::vector<double> centroid(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < d; ++j)
            centroid[static_cast<std::size_t>(j)] += traj.points[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    for (auto& c : centroid) c /= k;

    double r2 = 0.0;
    for (int i = 0; i < k; ++i)
        r2 = std::max(r2, squared_distance(traj.points[static_cast<std::size_t>(i)], centroid));

    const double pct = 100.0 * ball_volume(d, std::sqrt(r2)) / traj.bounds.volume();
    return std::min(100.0, pct);
}

std::vector<std::pair<int, double>> coverage_dynamics(const Trajectory& traj) {
    traj.validate();
    if (traj.length() < 5) throw ContractViolation("coverage_dynamics: need at least 5 points");
    std::vector<std::pair<int, double>> series;
    for (int k = 5; k <= traj.length(); k += 5) series.emplace_back(k, coverage(traj, k));
    return series;
}

std::optional<double> norm_traj_length(const Trajectory& traj) {
    traj.validate();
    if (traj.length() < 2) throw ContractViolation("norm_traj_length: need at least 2 points");

    double path = 0.0;
    for (int i = 0; i + 1 < traj.length(); ++i)
        path += std::sqrt(squared_distance(traj.points[static_cast<std::size_t>(i)],
                                           traj.points[static_cast<std::size_t>(i + 1)]));
    if (path < 1e-12) return std::nullopt;
    const double disp = std::sqrt(squared_distance(traj.points.front(), traj.points.back()));
    return disp / path;
}

WinCounts pairwise_wins(const std::vector<double>& a_best, const std::vector<double>& b_best) {
    if (a_best.size() != b_best.size())
        throw ContractViolation("pairwise_wins: catalogs differ in length");
    WinCounts w;
    for (std::size_t i = 0; i < a_best.size(); ++i) {
        if (a_best[i] < b_best[i])
            ++w.a_wins;
        else if (b_best[i] < a_best[i])
            ++w.b_wins;
        else
            ++w.ties;
    }
    return w;
}

MetricSummary summarize(const Trajectory& traj, int clamped_count, int fallback_count) {
    MetricSummary m;
    m.best_step = best_step(traj);
    m.best_loss = traj.losses[static_cast<std::size_t>(m.best_step - 1)];
    if (traj.length() >= 5) m.coverage_series = coverage_dynamics(traj);
    if (traj.length() >= 2) m.norm_traj_length = norm_traj_length(traj);
    m.clamped_count = clamped_count;
    m.fallback_count = fallback_count;
    return m;
}

} // namespace bbo
