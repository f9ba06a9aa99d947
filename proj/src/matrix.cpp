#include "superrl/matrix.hpp"

#include <cmath>

#include "superrl/errors.hpp"

namespace superrl {

Matrix Matrix::randn(std::size_t r, std::size_t c, double scale, Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.data) {
        v = scale * rng.gaussian();
    }
    return m;
}

bool all_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

bool all_finite(const Matrix& m) { return all_finite(std::span<const double>(m.data)); }

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.cols) {
        throw ShapeError("matvec: vector length " + std::to_string(x.size()) +
                         " != cols " + std::to_string(a.cols));
    }
    std::vector<double> y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* row = a.data.data() + i * a.cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) {
            acc += row[j] * x[j];
        }
        y[i] = acc;
    }
    return y;
}

void matvec_transposed_add(const Matrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != a.rows || y.size() != a.cols) {
        throw ShapeError("matvec_transposed_add: shape mismatch");
    }
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* row = a.data.data() + i * a.cols;
        const double xi = x[i];
        for (std::size_t j = 0; j < a.cols; ++j) {
            y[j] += row[j] * xi;
        }
    }
}

void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v, double scale) {
    if (u.size() != a.rows || v.size() != a.cols) {
        throw ShapeError("add_outer: shape mismatch");
    }
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* row = a.data.data() + i * a.cols;
        const double ui = scale * u[i];
        for (std::size_t j = 0; j < a.cols; ++j) {
            row[j] += ui * v[j];
        }
    }
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) {
        throw ShapeError("axpy: length mismatch");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] += a * x[i];
    }
}

}  // namespace superrl
