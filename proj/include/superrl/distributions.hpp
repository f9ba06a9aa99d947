#pragma once

#include <span>
#include <vector>

#include "superrl/rng.hpp"

namespace superrl {

/// Numerically stabilized log-softmax (max subtraction); exp of the result
/// sums to 1 within 1e-12 for any finite input.
std::vector<double> log_softmax(std::span<const double> logits);

/// Draws an index distributed as exp(log_probs). Temperature is fixed at 1.0
/// and the distribution is never truncated (no top-k, top-p = 1).
int sample_categorical(std::span<const double> log_probs, Rng& rng);

/// H = -sum p log p from a normalized log-probability vector.
double entropy_from_log_probs(std::span<const double> log_probs);

/// Accumulates coeff * dH/dlogits into grad_logits.
/// dH/dz_j = -p_j (log p_j + H).
void entropy_backward(std::span<const double> log_probs, double coeff,
                      std::span<double> grad_logits);

/// Exact KL(p || q) between two categoricals given as log-probability vectors.
double exact_categorical_kl(std::span<const double> log_p, std::span<const double> log_q);

}  // namespace superrl
