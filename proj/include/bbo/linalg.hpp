#pragma once

#include <span>
#include <vector>

#include "bbo/rng.hpp"

namespace bbo {

/// Dense square matrix, row-major. Dimensions here are tiny (d <= 5), so the
/// sole goal is clarity and determinism, not performance.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int n, double fill = 0.0);

    static Matrix identity(int n);

    int size() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

    bool operator==(const Matrix&) const = default;

    std::vector<double> multiply(std::span<const double> x) const;
    Matrix multiply(const Matrix& other) const;
    Matrix transposed() const;

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

private:
    int n_ = 0;
    std::vector<double> a_;
};

/// Eigendecomposition of a symmetric matrix: values ascending, matching
/// eigenvectors as columns of `vectors`.
struct SymEigen {
    std::vector<double> values;
    Matrix vectors;
};

/// Cyclic Jacobi eigensolver for symmetric matrices.
/// Throws NumericalBreakdown if rotation sweeps fail to converge or the input
/// contains non-finite entries.
SymEigen sym_eigen(const Matrix& m);

/// Random orthogonal matrix: QR (modified Gram-Schmidt) of a Gaussian draw.
Matrix random_rotation(int n, Rng& rng);

} // namespace bbo
