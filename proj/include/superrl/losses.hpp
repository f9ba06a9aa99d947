#pragma once

#include <span>
#include <string>
#include <vector>

#include "superrl/policy.hpp"

namespace superrl {

/// How the policy-gradient and SFT losses are fused. LogSigma is the
/// uncertainty-weighted objective; Theta, PerStep and ExpertInject are the
/// comparison baselines.
enum class Fusion { LogSigma, Theta, PerStep, ExpertInject };

std::string fusion_name(Fusion fusion);
Fusion fusion_from_name(const std::string& name);

struct HybridConfig {
    Fusion fusion = Fusion::LogSigma;
    double sigma_init_pg = 0.0;
    double sigma_init_sft = 0.0;
    double alpha = 2.0;    // Theta: w_pg = sigmoid(alpha), fixed for the run
    double lambda = 1.0;   // ExpertInject: weight on injected expert terms
    double clip_eps = 0.2;
    double ent_coef = 0.0;
    double kl_coef = 0.001;

    void validate() const;
};

struct LossBreakdown {
    double l_actor = 0.0;
    double l_sft = 0.0;
    double l_kl = 0.0;
    double l_value = 0.0;
    double l_total = 0.0;
    double w_pg = 1.0;
    double w_sft = 0.0;
};

// ---------------------------------------------------------------------------
// SFT cross-entropy
// ---------------------------------------------------------------------------

struct SftItem {
    const TaskInstance* instance = nullptr;
    const TokenSeq* tokens = nullptr;
};

struct SftResult {
    double loss = 0.0;  // mean per-token negative log-likelihood
    MlpParams grad;
    std::size_t token_count = 0;
};

SftResult sft_loss(const PolicyParams& params, std::span<const SftItem> batch);

// ---------------------------------------------------------------------------
// Advantages
// ---------------------------------------------------------------------------

/// Group-normalized advantages: (r_i - mean) / population std. Zero-variance
/// or singleton groups map to all-zero advantages rather than dividing.
std::vector<double> grpo_advantages(std::span<const double> group_rewards);

/// Monte-Carlo returns-to-go of one trajectory.
std::vector<double> returns_to_go(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Clipped-surrogate actor objective
// ---------------------------------------------------------------------------

struct ActorResult {
    double loss = 0.0;  // -(surrogate + ent_coef * entropy) + kl_coef * kl_mean
    double surrogate = 0.0;
    double entropy = 0.0;
    double kl_mean = 0.0;  // mean k3 estimate against the reference policy
    MlpParams grad;
};

/// PPO objective over a batch. Per-token ratios use the sampling-time
/// logprobs stored in each trajectory; advantages[i][t] weights token t of
/// trajectory i. Entropy bonus and the k3 KL penalty are folded in per the
/// configured coefficients. Throws NumericError (with step identification)
/// on a non-finite ratio.
ActorResult ppo_objective(const PolicyParams& params, std::span<const Trajectory> trajectories,
                          std::span<const std::vector<double>> advantages,
                          const HybridConfig& config);

/// Per-sample low-variance KL estimate: with r = exp(logp_ref - logp_cur),
/// returns (r - 1) - ln r; nonnegative, and its expectation under the
/// current policy equals KL(current || reference).
double kl_estimate_k3(double logp_cur, double logp_ref);

// ---------------------------------------------------------------------------
// Value (critic) loss
// ---------------------------------------------------------------------------

struct ValueResult {
    double loss = 0.0;  // 0.5 * mean squared error against returns
    MlpParams grad;
};

ValueResult value_loss(const PolicyParams& params, std::span<const Trajectory> trajectories,
                       std::span<const std::vector<double>> returns);

// ---------------------------------------------------------------------------
// Fusion rules
// ---------------------------------------------------------------------------

struct HybridLogSigmaResult {
    double l_total = 0.0;
    double d_sigma_pg = 0.0;
    double d_sigma_sft = 0.0;
    double w_pg = 0.0;
    double w_sft = 0.0;
};

/// L = exp(-2 s_pg) L_actor + exp(-2 s_sft) L_sft + s_pg + s_sft, with
/// analytic sigma derivatives d/ds = -2 exp(-2 s) L + 1.
HybridLogSigmaResult hybrid_log_sigma(double l_actor, double l_sft, double sigma_pg,
                                      double sigma_sft);

struct HybridThetaResult {
    double l_total = 0.0;
    double w_pg = 0.0;
    double w_sft = 0.0;
};

/// Convex combination with fixed mixing: w_pg = sigmoid(alpha).
HybridThetaResult hybrid_theta(double l_actor, double l_sft, double alpha);

/// Weighted SFT objective of the sequential (per-step) variant:
/// exp(-2 sigma) * l_sft + sigma.
struct WeightedSftObjective {
    double value = 0.0;
    double d_sigma = 0.0;
    double weight = 0.0;
};

WeightedSftObjective weighted_sft_objective(double l_sft, double sigma_sft);

struct PerStepSftResult {
    double l_sft = 0.0;
    double weighted_loss = 0.0;
    double weight = 0.0;
};

/// Applies one plain gradient step on the weighted SFT objective; used after
/// the PPO update of the same batch in the PerStep fusion. The sequential
/// variant bolts supervision on as a raw step, outside the run's optimizer
/// state.
PerStepSftResult per_step_sft_update(PolicyParams& params, std::span<const SftItem> demos,
                                     double lr);

// ---------------------------------------------------------------------------
// Expert-rollout injection (failure-mode baseline)
// ---------------------------------------------------------------------------

struct ExpertItem {
    const TaskInstance* instance = nullptr;
    const TokenSeq* tokens = nullptr;
    double reward = 0.0;  // scored by the env reward before injection
};

struct ExpertInjectionResult {
    double loss_term = 0.0;  // -lambda * mean(r * log pi), added to the actor loss
    MlpParams grad;
};

ExpertInjectionResult expert_injection(const PolicyParams& params,
                                       std::span<const ExpertItem> experts, double lambda);

}  // namespace superrl
