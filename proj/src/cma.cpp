#include "bbo/cma.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "bbo/errors.hpp"

namespace bbo {

namespace {

constexpr double kTwoPiE = 17.079468445347132; // 2 * pi * e

SymEigen factorize(const CmaState& state) {
    const auto eig = sym_eigen(state.cov);
    for (double v : eig.values)
        if (!(v > 0.0))
            throw NumericalBreakdown("cma: covariance lost positive definiteness");
    return eig;
}

// B * diag(f(D)) * B^T * x
std::vector<double> basis_transform(const SymEigen& eig, std::span<const double> x,
                                    double (*f)(double)) {
    const int n = eig.vectors.size();
    std::vector<double> tmp(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += eig.vectors(i, j) * x[static_cast<std::size_t>(i)];
        tmp[static_cast<std::size_t>(j)] = f(std::sqrt(eig.values[static_cast<std::size_t>(j)])) * dot;
    }
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += eig.vectors(i, j) * tmp[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = sum;
    }
    return out;
}

double inverse_of(double d) { return 1.0 / d; }

} // namespace

CmaState cma_init(int dim, const Bounds& bounds, std::uint64_t seed) {
    if (dim < 1) throw ContractViolation("cma_init: dim must be >= 1");
    bounds.validate();
    if (bounds.dim() != dim) throw ContractViolation("cma_init: bounds dimension mismatch");

    CmaState s;
    s.dim = dim;
    s.bounds = bounds;

    Rng rng(seed);
    s.mean.resize(static_cast<std::size_t>(dim));
    double width_sum = 0.0;
    for (int i = 0; i < dim; ++i) {
        s.mean[static_cast<std::size_t>(i)] = rng.uniform(bounds.lower[static_cast<std::size_t>(i)],
                                                          bounds.upper[static_cast<std::size_t>(i)]);
        width_sum += bounds.upper[static_cast<std::size_t>(i)] - bounds.lower[static_cast<std::size_t>(i)];
    }
    s.sigma = 0.3 * width_sum / dim;
    s.cov = Matrix::identity(dim);
    s.path_sigma.assign(static_cast<std::size_t>(dim), 0.0);
    s.path_c.assign(static_cast<std::size_t>(dim), 0.0);
    s.generation = 0;

    s.lambda = 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dim))));
    s.mu = s.lambda / 2;
    s.weights.resize(static_cast<std::size_t>(s.mu));
    double wsum = 0.0, wsq = 0.0;
    for (int i = 0; i < s.mu; ++i) {
        const double w = std::log((s.lambda + 1) / 2.0) - std::log(i + 1.0);
        s.weights[static_cast<std::size_t>(i)] = w;
        wsum += w;
    }
    for (auto& w : s.weights) {
        w /= wsum;
        wsq += w * w;
    }
    s.mu_eff = 1.0 / wsq;

    const double n = dim;
    s.c_sigma = (s.mu_eff + 2.0) / (n + s.mu_eff + 5.0);
    s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (n + 1.0)) - 1.0) + s.c_sigma;
    s.c_c = (4.0 + s.mu_eff / n) / (n + 4.0 + 2.0 * s.mu_eff / n);
    s.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + s.mu_eff);
    s.c_mu = std::min(1.0 - s.c_1,
                      2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) / ((n + 2.0) * (n + 2.0) + s.mu_eff));
    s.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    return s;
}

Generation cma_ask(const CmaState& state, Rng& rng) {
    const auto eig = factorize(state);

    Generation gen;
    gen.candidates.reserve(static_cast<std::size_t>(state.lambda));
    for (int k = 0; k < state.lambda; ++k) {
        const auto z = rng.normal_vector(state.dim);
        std::vector<double> x(static_cast<std::size_t>(state.dim));
        for (int i = 0; i < state.dim; ++i) {
            double sum = 0.0;
            for (int j = 0; j < state.dim; ++j)
                sum += eig.vectors(i, j) * std::sqrt(eig.values[static_cast<std::size_t>(j)]) *
                       z[static_cast<std::size_t>(j)];
            x[static_cast<std::size_t>(i)] = state.mean[static_cast<std::size_t>(i)] + state.sigma * sum;
        }
        gen.candidates.push_back({state.bounds.clamp(x), false});
    }
    return gen;
}

CmaState cma_tell(const CmaState& state, const Generation& gen) {
    if (!gen.losses)
        throw ContractViolation("cma_tell: generation has no losses");
    const int count = static_cast<int>(gen.candidates.size());
    if (count < 1 || count > state.lambda)
        throw ContractViolation("cma_tell: candidate count out of range");
    if (static_cast<int>(gen.losses->size()) != count)
        throw ContractViolation("cma_tell: losses length mismatch");
    for (double l : *gen.losses)
        if (!std::isfinite(l)) throw ContractViolation("cma_tell: non-finite loss");

    const auto eig = factorize(state);

    // rank ascending by loss, stable on index for determinism
    std::vector<int> order(static_cast<std::size_t>(count));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return (*gen.losses)[static_cast<std::size_t>(a)] < (*gen.losses)[static_cast<std::size_t>(b)];
    });

    // possibly truncated selection with renormalized leading weights
    const int mu_sel = std::min(state.mu, count);
    std::vector<double> w(state.weights.begin(), state.weights.begin() + mu_sel);
    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& wi : w) wi /= wsum;

    const int n = state.dim;
    const double max_mahal = 2.0 * std::sqrt(static_cast<double>(n));

    // selected displacements y = (x - m) / sigma, injected ones length-clipped
    std::vector<std::vector<double>> ys(static_cast<std::size_t>(mu_sel));
    for (int r = 0; r < mu_sel; ++r) {
        const auto& cand = gen.candidates[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
        std::vector<double> y(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            y[static_cast<std::size_t>(i)] =
                (cand.point[static_cast<std::size_t>(i)] - state.mean[static_cast<std::size_t>(i)]) / state.sigma;
        if (cand.injected) {
            const auto whitened = basis_transform(eig, y, inverse_of);
            double norm = 0.0;
            for (double v : whitened) norm += v * v;
            norm = std::sqrt(norm);
            if (norm > max_mahal)
                for (auto& v : y) v *= max_mahal / norm;
        }
        ys[static_cast<std::size_t>(r)] = std::move(y);
    }

    std::vector<double> dy(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < mu_sel; ++r)
        for (int i = 0; i < n; ++i)
            dy[static_cast<std::size_t>(i)] += w[static_cast<std::size_t>(r)] *
                                               ys[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];

    CmaState next = state;
    for (int i = 0; i < n; ++i)
        next.mean[static_cast<std::size_t>(i)] = state.mean[static_cast<std::size_t>(i)] +
                                                 state.sigma * dy[static_cast<std::size_t>(i)];

    // cumulative step-size adaptation
    const auto whitened_dy = basis_transform(eig, dy, inverse_of);
    const double cs = state.c_sigma;
    const double path_scale = std::sqrt(cs * (2.0 - cs) * state.mu_eff);
    double ps_norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
        next.path_sigma[static_cast<std::size_t>(i)] =
            (1.0 - cs) * state.path_sigma[static_cast<std::size_t>(i)] +
            path_scale * whitened_dy[static_cast<std::size_t>(i)];
        ps_norm2 += next.path_sigma[static_cast<std::size_t>(i)] * next.path_sigma[static_cast<std::size_t>(i)];
    }
    const double ps_norm = std::sqrt(ps_norm2);

    const double decay = 1.0 - std::pow(1.0 - cs, 2.0 * (state.generation + 1));
    const bool hsig = ps_norm / std::sqrt(decay) / state.chi_n < 1.4 + 2.0 / (n + 1.0);

    const double cc = state.c_c;
    const double pc_scale = hsig ? std::sqrt(cc * (2.0 - cc) * state.mu_eff) : 0.0;
    for (int i = 0; i < n; ++i)
        next.path_c[static_cast<std::size_t>(i)] = (1.0 - cc) * state.path_c[static_cast<std::size_t>(i)] +
                                                   pc_scale * dy[static_cast<std::size_t>(i)];

    // rank-1 + rank-mu covariance update
    const double c1 = state.c_1, cmu = state.c_mu;
    const double stall = hsig ? 0.0 : c1 * cc * (2.0 - cc);
    Matrix c_next(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = (1.0 - c1 - cmu + stall) * state.cov(i, j) +
                       c1 * next.path_c[static_cast<std::size_t>(i)] * next.path_c[static_cast<std::size_t>(j)];
            for (int r = 0; r < mu_sel; ++r)
                v += cmu * w[static_cast<std::size_t>(r)] *
                     ys[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] *
                     ys[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
            c_next(i, j) = v;
        }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double sym = 0.5 * (c_next(i, j) + c_next(j, i));
            c_next(i, j) = c_next(j, i) = sym;
        }
    next.cov = std::move(c_next);

    next.sigma = state.sigma * std::exp((cs / state.d_sigma) * (ps_norm / state.chi_n - 1.0));
    next.generation = state.generation + 1;
    return next;
}

double gaussian_entropy(const CmaState& state) {
    const auto eig = factorize(state);
    double log_det_c = 0.0;
    for (double v : eig.values) log_det_c += std::log(v);
    const double n = state.dim;
    return 0.5 * n * std::log(kTwoPiE) + n * std::log(state.sigma) + 0.5 * log_det_c;
}

std::string cma_state_to_text(const CmaState& s) {
    nlohmann::json j;
    j["dim"] = s.dim;
    j["lower"] = s.bounds.lower;
    j["upper"] = s.bounds.upper;
    j["mean"] = s.mean;
    j["sigma"] = s.sigma;
    j["cov"] = s.cov.data();
    j["path_sigma"] = s.path_sigma;
    j["path_c"] = s.path_c;
    j["generation"] = s.generation;
    j["lambda"] = s.lambda;
    j["weights"] = s.weights;
    return j.dump();
}

CmaState cma_state_from_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    Bounds bounds{j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>()};
    CmaState s = cma_init(j.at("dim").get<int>(), bounds, 0);
    s.mean = j.at("mean").get<std::vector<double>>();
    s.sigma = j.at("sigma").get<double>();
    s.cov = Matrix(s.dim);
    s.cov.data() = j.at("cov").get<std::vector<double>>();
    s.path_sigma = j.at("path_sigma").get<std::vector<double>>();
    s.path_c = j.at("path_c").get<std::vector<double>>();
    s.generation = j.at("generation").get<int>();
    if (j.at("lambda").get<int>() != s.lambda ||
        j.at("weights").get<std::vector<double>>() != s.weights)
        throw ContractViolation("cma_state_from_text: snapshot disagrees with derived defaults");
    return s;
}

} // namespace bbo
