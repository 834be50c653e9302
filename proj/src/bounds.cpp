#include "bbo/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "bbo/errors.hpp"

namespace bbo {

Bounds Bounds::box(int d, double lo, double hi) {
    Bounds b;
    b.lower.assign(static_cast<std::size_t>(d), lo);
    b.upper.assign(static_cast<std::size_t>(d), hi);
    b.validate();
    return b;
}

void Bounds::validate() const {
    if (lower.empty() || lower.size() != upper.size())
        throw ContractViolation("Bounds: lower/upper must be non-empty and equal length");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] < upper[i]))
            throw ContractViolation("Bounds: lower[i] must be < upper[i]");
}

bool Bounds::contains(std::span<const double> point) const {
    if (point.size() != lower.size()) return false;
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (point[i] < lower[i] || point[i] > upper[i]) return false;
    return true;
}

std::vector<double> Bounds::clamp(std::span<const double> point) const {
    std::vector<double> out(point.begin(), point.end());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(out[i], lower[i], upper[i]);
    return out;
}

double Bounds::diagonal() const {
    double s = 0.0;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const double w = upper[i] - lower[i];
        s += w * w;
    }
    return std::sqrt(s);
}

double Bounds::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
    return v;
}

} // namespace bbo
