#include "superrl/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "superrl/errors.hpp"

namespace superrl {

void AdamState::step(std::span<double> theta, std::span<const double> grad, double lr,
                     double weight_decay) {
    if (theta.size() != m_.size() || grad.size() != m_.size()) {
        throw ShapeError("AdamState::step: size mismatch");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        theta[i] -= lr * weight_decay * theta[i];
        m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
        v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        const double m_hat = m_[i] / bc1;
        const double v_hat = v_[i] / bc2;
        theta[i] -= lr * m_hat / (std::sqrt(v_hat) + kEps);
    }
}

namespace {

void step_mlp(AdamState& state, MlpParams& params, const MlpParams& grad, double lr) {
    std::vector<double> theta = params.flatten();
    state.step(theta, grad.flatten(), lr, PolicyOptimizer::kWeightDecay);
    params = MlpParams::from_flat(theta, params.input_dim(), params.hidden_dim(),
                                  params.output_dim());
}

}  // namespace

void PolicyOptimizer::step_net(PolicyParams& params, const MlpParams& grad, double lr) {
    step_mlp(net, params.net, grad, lr);
}

void PolicyOptimizer::step_value(PolicyParams& params, const MlpParams& grad, double lr) {
    step_mlp(value, params.value_net, grad, lr);
}

void PolicyOptimizer::step_sigmas(PolicyParams& params, double d_sigma_pg, double d_sigma_sft,
                                  double lr) {
    double theta[2] = {params.sigma_pg, params.sigma_sft};
    const double grad[2] = {d_sigma_pg, d_sigma_sft};
    sigmas.step(theta, grad, lr * kSigmaLrScale);
    // projection keeps the learned weights exp(-2 sigma) in a sane range;
    // unbounded sigma drift is a degenerate solution of the weighting
    // objective when a loss term hovers near or below zero
    params.sigma_pg = std::clamp(theta[0], -kSigmaLimit, kSigmaLimit);
    params.sigma_sft = std::clamp(theta[1], -kSigmaLimit, kSigmaLimit);
}

}  // namespace superrl
