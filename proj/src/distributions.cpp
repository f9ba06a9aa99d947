#include "superrl/distributions.hpp"

#include <algorithm>
#include <cmath>

#include "superrl/errors.hpp"

namespace superrl {

std::vector<double> log_softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw ShapeError("log_softmax: empty input");
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) {
        sum += std::exp(z - m);
    }
    const double lse = m + std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = logits[i] - lse;
    }
    return out;
}

int sample_categorical(std::span<const double> log_probs, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < log_probs.size(); ++i) {
        cum += std::exp(log_probs[i]);
        if (u < cum) {
            return static_cast<int>(i);
        }
    }
    // cumulative sum fell a rounding error short of 1
    return static_cast<int>(log_probs.size()) - 1;
}

double entropy_from_log_probs(std::span<const double> log_probs) {
    double h = 0.0;
    for (double lp : log_probs) {
        h -= std::exp(lp) * lp;
    }
    return h;
}

void entropy_backward(std::span<const double> log_probs, double coeff,
                      std::span<double> grad_logits) {
    if (grad_logits.size() != log_probs.size()) {
        throw ShapeError("entropy_backward: length mismatch");
    }
    const double h = entropy_from_log_probs(log_probs);
    for (std::size_t j = 0; j < log_probs.size(); ++j) {
        grad_logits[j] += coeff * (-std::exp(log_probs[j]) * (log_probs[j] + h));
    }
}

double exact_categorical_kl(std::span<const double> log_p, std::span<const double> log_q) {
    if (log_p.size() != log_q.size()) {
        throw ShapeError("exact_categorical_kl: length mismatch");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < log_p.size(); ++i) {
        kl += std::exp(log_p[i]) * (log_p[i] - log_q[i]);
    }
    return kl;
}

}  // namespace superrl
