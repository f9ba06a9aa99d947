#pragma once

#include <span>
#include <vector>

#include "superrl/policy.hpp"

namespace superrl {

/// Adam over a flat parameter view. Deterministic; one instance per tensor.
class AdamState {
public:
    AdamState() = default;
    explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

    /// Decoupled weight decay: theta -= lr * weight_decay * theta before the
    /// Adam update.
    void step(std::span<double> theta, std::span<const double> grad, double lr,
              double weight_decay = 0.0);

private:
    std::vector<double> m_;
    std::vector<double> v_;
    long long t_ = 0;

    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;
};

/// Optimizer state for a full policy: actor net, value net, and the two
/// log-deviation scalars (which share the net's learning rate).
struct PolicyOptimizer {
    AdamState net;
    AdamState value;
    AdamState sigmas;

    PolicyOptimizer() = default;
    explicit PolicyOptimizer(const PolicyParams& params)
        : net(params.net.param_count()),
          value(params.value_net.param_count()),
          sigmas(2) {}

    /// Bound on |sigma_pg|, |sigma_sft| after an update.
    static constexpr double kSigmaLimit = 2.0;
    /// The log-deviations adapt much slower than the policy itself; at the
    /// policy's rate the additive sigma regularizer saturates the bounds
    /// within a desk-scale budget.
    static constexpr double kSigmaLrScale = 0.05;
    /// Weight decay on the nets; the sigmas are regularized by their own
    /// additive terms instead.
    static constexpr double kWeightDecay = 0.3;

    void step_net(PolicyParams& params, const MlpParams& grad, double lr);
    void step_value(PolicyParams& params, const MlpParams& grad, double lr);
    /// Pass 0 for a sigma that does not participate in the current regime.
    void step_sigmas(PolicyParams& params, double d_sigma_pg, double d_sigma_sft, double lr);
};

}  // namespace superrl
