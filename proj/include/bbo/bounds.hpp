#pragma once

#include <span>
#include <vector>

namespace bbo {

/// Per-axis box bounds. lower[i] < upper[i] for every axis.
struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    int dim() const { return static_cast<int>(lower.size()); }

    static Bounds box(int d, double lo, double hi);

    /// Throws ContractViolation if the invariants do not hold.
    void validate() const;

    bool contains(std::span<const double> point) const;

    /// Componentwise clamp into the box.
    std::vector<double> clamp(std::span<const double> point) const;

    /// Euclidean length of the box diagonal.
    double diagonal() const;

    /// Box volume (area for d = 2).
    double volume() const;

    bool operator==(const Bounds&) const = default;
};

} // namespace bbo
