#include "superrl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "superrl/errors.hpp"

namespace superrl {

void MlpParams::add_scaled(const MlpParams& other, double a) {
    if (other.w1.rows != w1.rows || other.w1.cols != w1.cols ||
        other.w2.rows != w2.rows || other.w2.cols != w2.cols) {
        throw ShapeError("MlpParams::add_scaled: shape mismatch");
    }
    axpy(a, other.w1.data, w1.data);
    axpy(a, other.b1, b1);
    axpy(a, other.w2.data, w2.data);
    axpy(a, other.b2, b2);
}

void MlpParams::set_zero() {
    std::fill(w1.data.begin(), w1.data.end(), 0.0);
    std::fill(b1.begin(), b1.end(), 0.0);
    std::fill(w2.data.begin(), w2.data.end(), 0.0);
    std::fill(b2.begin(), b2.end(), 0.0);
}

std::vector<double> MlpParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    flat.insert(flat.end(), w1.data.begin(), w1.data.end());
    flat.insert(flat.end(), b1.begin(), b1.end());
    flat.insert(flat.end(), w2.data.begin(), w2.data.end());
    flat.insert(flat.end(), b2.begin(), b2.end());
    return flat;
}

MlpParams MlpParams::from_flat(std::span<const double> flat, std::size_t input,
                               std::size_t hidden, std::size_t output) {
    MlpParams p = zeros(input, hidden, output);
    if (flat.size() != p.param_count()) {
        throw ShapeError("MlpParams::from_flat: length mismatch");
    }
    std::size_t off = 0;
    auto take = [&](std::vector<double>& dst) {
        std::copy(flat.begin() + off, flat.begin() + off + dst.size(), dst.begin());
        off += dst.size();
    };
    take(p.w1.data);
    take(p.b1);
    take(p.w2.data);
    take(p.b2);
    return p;
}

MlpParams MlpParams::zeros(std::size_t input, std::size_t hidden, std::size_t output) {
    MlpParams p;
    p.w1 = Matrix(hidden, input);
    p.b1.assign(hidden, 0.0);
    p.w2 = Matrix(output, hidden);
    p.b2.assign(output, 0.0);
    return p;
}

MlpParams MlpParams::random_init(std::size_t input, std::size_t hidden, std::size_t output,
                                 double scale, Rng& rng) {
    MlpParams p;
    p.w1 = Matrix::randn(hidden, input, scale, rng);
    p.b1.assign(hidden, 0.0);
    p.w2 = Matrix::randn(output, hidden, scale, rng);
    p.b2.assign(output, 0.0);
    return p;
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input,
                                MlpCache* cache) {
    if (input.size() != params.input_dim()) {
        throw ShapeError("mlp_forward: input length " + std::to_string(input.size()) +
                         " != " + std::to_string(params.input_dim()));
    }
    std::vector<double> hidden = matvec(params.w1, input);
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        hidden[i] = std::tanh(hidden[i] + params.b1[i]);
    }
    std::vector<double> logits = matvec(params.w2, hidden);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        logits[i] += params.b2[i];
    }
    if (cache != nullptr) {
        cache->input.assign(input.begin(), input.end());
        cache->hidden = std::move(hidden);
    }
    return logits;
}

void mlp_backward_accum(const MlpParams& params, const MlpCache& cache,
                        std::span<const double> grad_logits, MlpParams& grad) {
    if (cache.input.size() != params.input_dim() || cache.hidden.size() != params.hidden_dim()) {
        throw ShapeError("mlp_backward: cache does not match params");
    }
    if (grad_logits.size() != params.output_dim()) {
        throw ShapeError("mlp_backward: grad_logits length mismatch");
    }
    // dW2 = g h^T, db2 = g
    add_outer(grad.w2, grad_logits, cache.hidden);
    axpy(1.0, grad_logits, grad.b2);
    // dh = W2^T g, dpre = dh * (1 - h^2)
    std::vector<double> dpre(params.hidden_dim(), 0.0);
    matvec_transposed_add(params.w2, grad_logits, dpre);
    for (std::size_t i = 0; i < dpre.size(); ++i) {
        dpre[i] *= 1.0 - cache.hidden[i] * cache.hidden[i];
    }
    // dW1 = dpre x^T, db1 = dpre
    add_outer(grad.w1, dpre, cache.input);
    axpy(1.0, dpre, grad.b1);
}

MlpParams mlp_backward(const MlpParams& params, const MlpCache& cache,
                       std::span<const double> grad_logits) {
    MlpParams grad =
        MlpParams::zeros(params.input_dim(), params.hidden_dim(), params.output_dim());
    mlp_backward_accum(params, cache, grad_logits, grad);
    return grad;
}

bool all_finite(const MlpParams& params) {
    return all_finite(params.w1) && all_finite(std::span<const double>(params.b1)) &&
           all_finite(params.w2) && all_finite(std::span<const double>(params.b2));
}

}  // namespace superrl
