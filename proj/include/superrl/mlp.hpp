#pragma once

#include <span>
#include <vector>

#include "superrl/matrix.hpp"
#include "superrl/rng.hpp"

namespace superrl {

/// Parameters of a two-layer tanh MLP: logits = w2 * tanh(w1 * x + b1) + b2.
struct MlpParams {
    Matrix w1;               // hidden x input
    std::vector<double> b1;  // hidden
    Matrix w2;               // output x hidden
    std::vector<double> b2;  // output

    std::size_t input_dim() const { return w1.cols; }
    std::size_t hidden_dim() const { return w1.rows; }
    std::size_t output_dim() const { return w2.rows; }
    std::size_t param_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

    /// this += a * other (shape-checked)
    void add_scaled(const MlpParams& other, double a);
    void set_zero();

    std::vector<double> flatten() const;
    static MlpParams from_flat(std::span<const double> flat, std::size_t input,
                               std::size_t hidden, std::size_t output);

    static MlpParams zeros(std::size_t input, std::size_t hidden, std::size_t output);
    static MlpParams random_init(std::size_t input, std::size_t hidden, std::size_t output,
                                 double scale, Rng& rng);
};

/// Activation record from a forward pass; enough for exact backprop.
struct MlpCache {
    std::vector<double> input;
    std::vector<double> hidden;  // post-tanh
};

/// Forward pass. cache, when non-null, is filled for a later backward call.
std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input,
                                MlpCache* cache = nullptr);

/// Exact gradient of logits . grad_logits w.r.t. every parameter.
MlpParams mlp_backward(const MlpParams& params, const MlpCache& cache,
                       std::span<const double> grad_logits);

/// Same as mlp_backward but accumulates into an existing gradient buffer;
/// avoids per-token allocation in the training inner loop.
void mlp_backward_accum(const MlpParams& params, const MlpCache& cache,
                        std::span<const double> grad_logits, MlpParams& grad);

bool all_finite(const MlpParams& params);

}  // namespace superrl
