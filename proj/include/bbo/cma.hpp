#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bbo/bounds.hpp"
#include "bbo/linalg.hpp"
#include "bbo/rng.hpp"

namespace bbo {

/// One proposed point; `injected` marks externally supplied candidates
/// (hybrid overrides) that still take part in the rank-based update.
struct CmaCandidate {
    std::vector<double> point;
    bool injected = false;
};

/// A sampled population. `losses` stays empty between ask and tell; a told
/// generation may be shorter than lambda when the trial budget truncated it.
struct Generation {
    std::vector<CmaCandidate> candidates;
    std::optional<std::vector<double>> losses;
};

/// Full CMA-ES distribution state. A value type: ask and tell are pure
/// transitions, so one run owns one state and evaluation between the two
/// calls can be parallelized freely.
struct CmaState {
    int dim = 0;
    Bounds bounds;
    std::vector<double> mean;
    double sigma = 0.0;
    Matrix cov;
    std::vector<double> path_sigma;
    std::vector<double> path_c;
    int generation = 0;
    int lambda = 0;
    std::vector<double> weights; // positive recombination weights, sum to 1

    // derived constants, fixed at init
    int mu = 0;
    double mu_eff = 0.0;
    double c_sigma = 0.0;
    double d_sigma = 0.0;
    double c_c = 0.0;
    double c_1 = 0.0;
    double c_mu = 0.0;
    double chi_n = 0.0;
};

/// Fresh state: mean uniform in bounds, sigma = 0.3 x mean axis width,
/// identity covariance, lambda = 4 + floor(3 ln dim), tutorial-default
/// weights and learning rates.
CmaState cma_init(int dim, const Bounds& bounds, std::uint64_t seed);

/// Samples lambda candidates m + sigma * B * D * z, clamped to bounds.
/// Throws NumericalBreakdown if the covariance cannot be factorized.
Generation cma_ask(const CmaState& state, Rng& rng);

/// Rank-based update of mean, evolution paths, step size and covariance.
/// Injected candidates rank normally; their Mahalanobis displacement is
/// clipped to 2*sqrt(dim) before entering the updates. Accepts generations
/// truncated below lambda (final partial generation of a fixed budget):
/// selection then re-ranks only the evaluated candidates.
CmaState cma_tell(const CmaState& state, const Generation& gen);

/// Differential entropy of the proposal Gaussian in nats:
/// d/2 ln(2 pi e) + 1/2 ln det(sigma^2 C).
double gaussian_entropy(const CmaState& state);

/// State snapshot as a single structured text line (JSON), and its inverse.
std::string cma_state_to_text(const CmaState& state);
CmaState cma_state_from_text(const std::string& text);

} // namespace bbo
