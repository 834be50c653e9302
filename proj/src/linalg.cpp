#include "bbo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bbo/errors.hpp"

namespace bbo {

Matrix::Matrix(int n, double fill) : n_(n), a_(static_cast<std::size_t>(n) * n, fill) {}

Matrix Matrix::identity(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> Matrix::multiply(std::span<const double> x) const {
    std::vector<double> y(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n_; ++j) sum += (*this)(i, j) * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = sum;
    }
    return y;
}

Matrix Matrix::multiply(const Matrix& other) const {
    Matrix out(n_);
    for (int i = 0; i < n_; ++i)
        for (int k = 0; k < n_; ++k) {
            const double aik = (*this)(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < n_; ++j) out(i, j) += aik * other(k, j);
        }
    return out;
}

Matrix Matrix::transposed() const {
    Matrix out(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) out(j, i) = (*this)(i, j);
    return out;
}

SymEigen sym_eigen(const Matrix& m) {
    const int n = m.size();
    for (double v : m.data())
        if (!std::isfinite(v)) throw NumericalBreakdown("sym_eigen: non-finite matrix entry");

    Matrix a = m;
    Matrix v = Matrix::identity(n);

    auto off_diagonal_norm = [&] {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
    scale = std::max(scale, off_diagonal_norm());
    const double tol = 1e-14 * std::max(scale, 1.0);

    constexpr int kMaxSweeps = 64;
    int sweep = 0;
    while (off_diagonal_norm() > tol) {
        if (++sweep > kMaxSweeps) throw NumericalBreakdown("sym_eigen: Jacobi sweeps did not converge");
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) <= tol * 1e-2) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

    SymEigen out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors = Matrix(n);
    for (int col = 0; col < n; ++col) {
        const int src = order[static_cast<std::size_t>(col)];
        out.values[static_cast<std::size_t>(col)] = a(src, src);
        for (int row = 0; row < n; ++row) out.vectors(row, col) = v(row, src);
    }
    return out;
}

Matrix random_rotation(int n, Rng& rng) {
    Matrix q(n);
    // Gaussian columns, then modified Gram-Schmidt with one re-orthogonalization pass.
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) q(i, j) = rng.normal();

    for (int j = 0; j < n; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (int k = 0; k < j; ++k) {
                double dot = 0.0;
                for (int i = 0; i < n; ++i) dot += q(i, j) * q(i, k);
                for (int i = 0; i < n; ++i) q(i, j) -= dot * q(i, k);
            }
        }
        double norm = 0.0;
        for (int i = 0; i < n; ++i) norm += q(i, j) * q(i, j);
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw NumericalBreakdown("random_rotation: degenerate Gaussian draw");
        for (int i = 0; i < n; ++i) q(i, j) /= norm;
    }
    return q;
}

} // namespace bbo
