#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "superrl/rng.hpp"

namespace superrl {

/// Dense row-major matrix of doubles. Deliberately minimal: just what the
/// two-layer MLP and its gradients need.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::size_t size() const { return data.size(); }

    static Matrix randn(std::size_t r, std::size_t c, double scale, Rng& rng);
};

bool all_finite(std::span<const double> values);
bool all_finite(const Matrix& m);

/// y = A x
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

/// y += A^T x
void matvec_transposed_add(const Matrix& a, std::span<const double> x, std::span<double> y);

/// A += scale * u v^T
void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v,
               double scale = 1.0);

/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

}  // namespace superrl
