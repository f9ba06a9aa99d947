#include "superrl/losses.hpp"

#include "superrl/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "superrl/distributions.hpp"
#include "superrl/errors.hpp"
#include "superrl/parallel.hpp"

namespace superrl {

std::string fusion_name(Fusion fusion) {
    switch (fusion) {
        case Fusion::LogSigma: return "LogSigma";
        case Fusion::Theta: return "Theta";
        case Fusion::PerStep: return "PerStep";
        case Fusion::ExpertInject: return "ExpertInject";
    }
    return "?";
}

Fusion fusion_from_name(const std::string& name) {
    if (name == "LogSigma") return Fusion::LogSigma;
    if (name == "Theta") return Fusion::Theta;
    if (name == "PerStep") return Fusion::PerStep;
    if (name == "ExpertInject") return Fusion::ExpertInject;
    throw ConfigError("unknown fusion: " + name);
}

void HybridConfig::validate() const {
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) {
        throw ConfigError("clip_eps must lie in (0, 1)");
    }
    if (kl_coef < 0.0) {
        throw ConfigError("kl_coef must be >= 0");
    }
}

namespace {

// collects per-slot failure messages from parallel loop bodies; exceptions
// must not cross the OpenMP region, so they are rethrown afterwards in
// slot order
struct SlotErrors {
    std::vector<std::string> messages;
    explicit SlotErrors(std::size_t n) : messages(n) {}
    void rethrow_first() const {
        for (const std::string& m : messages) {
            if (!m.empty()) {
                throw NumericError(m);
            }
        }
    }
};

MlpParams zeros_like(const MlpParams& p) {
    return MlpParams::zeros(p.input_dim(), p.hidden_dim(), p.output_dim());
}

}  // namespace

SftResult sft_loss(const PolicyParams& params, std::span<const SftItem> batch) {
    if (batch.empty()) {
        throw ConfigError("sft_loss: empty batch");
    }
    const std::size_t n = batch.size();
    std::vector<MlpParams> grad_slots(n, zeros_like(params.net));
    std::vector<double> loss_slots(n, 0.0);
    std::vector<std::size_t> token_slots(n, 0);
    SlotErrors errors(n);

    for_each_index(n, [&](std::size_t i) {
        try {
            const SftItem& item = batch[i];
            const SequenceScore score = sequence_logprob(params, *item.instance, *item.tokens);
            std::vector<double> grad_logits(static_cast<std::size_t>(params.feat.vocab_size));
            for (std::size_t t = 0; t < item.tokens->size(); ++t) {
                loss_slots[i] -= score.per_step[t];
                const std::vector<double>& lp = score.log_dists[t];
                for (std::size_t j = 0; j < grad_logits.size(); ++j) {
                    grad_logits[j] = std::exp(lp[j]);  // d(-log p_y)/dz = p - onehot
                }
                grad_logits[static_cast<std::size_t>((*item.tokens)[t])] -= 1.0;
                mlp_backward_accum(params.net, score.caches[t], grad_logits, grad_slots[i]);
            }
            token_slots[i] = item.tokens->size();
        } catch (const std::exception& e) {
            errors.messages[i] = e.what();
        }
    });
    errors.rethrow_first();

    SftResult result;
    result.grad = zeros_like(params.net);
    for (std::size_t i = 0; i < n; ++i) {
        result.loss += loss_slots[i];
        result.token_count += token_slots[i];
    }
    if (result.token_count == 0) {
        throw ConfigError("sft_loss: batch contains no tokens");
    }
    const double inv = 1.0 / static_cast<double>(result.token_count);
    result.loss *= inv;
    for (std::size_t i = 0; i < n; ++i) {
        result.grad.add_scaled(grad_slots[i], inv);
    }
    return result;
}

std::vector<double> grpo_advantages(std::span<const double> group_rewards) {
    const std::size_t n = group_rewards.size();
    if (n == 0) {
        throw ConfigError("grpo_advantages: empty group");
    }
    std::vector<double> adv(n, 0.0);
    if (n == 1) {
        return adv;
    }
    double mean = 0.0;
    for (double r : group_rewards) mean += r;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double r : group_rewards) var += (r - mean) * (r - mean);
    var /= static_cast<double>(n);
    const double std_dev = std::sqrt(var);
    if (std_dev < 1e-12) {
        return adv;  // zero-variance group: no signal, no division
    }
    for (std::size_t i = 0; i < n; ++i) {
        adv[i] = (group_rewards[i] - mean) / std_dev;
    }
    return adv;
}

std::vector<double> returns_to_go(const Trajectory& traj) {
    std::vector<double> returns(traj.rewards.size(), 0.0);
    double acc = 0.0;
    for (std::size_t t = traj.rewards.size(); t-- > 0;) {
        acc += traj.rewards[t];
        returns[t] = acc;
    }
    return returns;
}

double kl_estimate_k3(double logp_cur, double logp_ref) {
    const double r = std::exp(logp_ref - logp_cur);
    return std::max(0.0, (r - 1.0) - (logp_ref - logp_cur));
}

ActorResult ppo_objective(const PolicyParams& params, std::span<const Trajectory> trajectories,
                          std::span<const std::vector<double>> advantages,
                          const HybridConfig& config) {
    config.validate();
    if (trajectories.empty()) {
        throw ConfigError("ppo_objective: empty batch");
    }
    if (advantages.size() != trajectories.size()) {
        throw ShapeError("ppo_objective: advantages do not match trajectories");
    }
    std::size_t total_tokens = 0;
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        if (advantages[i].size() != trajectories[i].tokens.size()) {
            throw ShapeError("ppo_objective: per-token advantage length mismatch");
        }
        total_tokens += trajectories[i].tokens.size();
    }
    if (total_tokens == 0) {
        throw ConfigError("ppo_objective: batch contains no tokens");
    }

    const std::size_t n = trajectories.size();
    std::vector<MlpParams> grad_slots(n, zeros_like(params.net));
    std::vector<double> surr_slots(n, 0.0), ent_slots(n, 0.0), kl_slots(n, 0.0);
    SlotErrors errors(n);

    for_each_index(n, [&](std::size_t i) {
        try {
            const Trajectory& traj = trajectories[i];
            if (traj.instance == nullptr) {
                throw ShapeError("ppo_objective: trajectory lacks its instance backref");
            }
            const SequenceScore score = sequence_logprob(params, *traj.instance, traj.tokens);
            std::vector<double> grad_logits(static_cast<std::size_t>(params.feat.vocab_size));
            for (std::size_t t = 0; t < traj.tokens.size(); ++t) {
                const double cur = score.per_step[t];
                const double old = traj.logprobs[t];
                const double ratio = std::exp(cur - old);
                if (!std::isfinite(ratio)) {
                    throw NumericError("ppo_objective: non-finite ratio at trajectory " +
                                       std::to_string(i) + ", step " + std::to_string(t));
                }
                const double adv = advantages[i][t];
                const double unclipped = ratio * adv;
                const double clipped =
                    std::clamp(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps) * adv;
                surr_slots[i] += std::min(unclipped, clipped);
                // gradient flows only through the unclipped branch
                const double surr_coef = unclipped <= clipped ? ratio * adv : 0.0;

                const std::vector<double>& lp = score.log_dists[t];
                ent_slots[i] += entropy_from_log_probs(lp);
                const double k3_ratio = std::exp(traj.ref_logprobs[t] - cur);
                kl_slots[i] += (k3_ratio - 1.0) - (traj.ref_logprobs[t] - cur);

                // d loss/d logits for this token:
                //   -(surrogate) - ent_coef * H + kl_coef * k3
                const std::size_t y = static_cast<std::size_t>(traj.tokens[t]);
                for (std::size_t j = 0; j < grad_logits.size(); ++j) {
                    const double p = std::exp(lp[j]);
                    const double onehot = j == y ? 1.0 : 0.0;
                    grad_logits[j] = (-surr_coef + config.kl_coef * (1.0 - k3_ratio)) *
                                     (onehot - p);
                }
                entropy_backward(lp, -config.ent_coef, grad_logits);
                mlp_backward_accum(params.net, score.caches[t], grad_logits, grad_slots[i]);
            }
        } catch (const std::exception& e) {
            errors.messages[i] = e.what();
        }
    });
    errors.rethrow_first();

    ActorResult result;
    result.grad = zeros_like(params.net);
    const double inv = 1.0 / static_cast<double>(total_tokens);
    for (std::size_t i = 0; i < n; ++i) {
        result.surrogate += surr_slots[i];
        result.entropy += ent_slots[i];
        result.kl_mean += kl_slots[i];
        result.grad.add_scaled(grad_slots[i], inv);
    }
    result.surrogate *= inv;
    result.entropy *= inv;
    result.kl_mean *= inv;
    result.loss = -(result.surrogate + config.ent_coef * result.entropy) +
                  config.kl_coef * result.kl_mean;
    return result;
}

ValueResult value_loss(const PolicyParams& params, std::span<const Trajectory> trajectories,
                       std::span<const std::vector<double>> returns) {
    if (trajectories.empty()) {
        throw ConfigError("value_loss: empty batch");
    }
    if (returns.size() != trajectories.size()) {
        throw ShapeError("value_loss: returns do not match trajectories");
    }
    std::size_t total_tokens = 0;
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        if (returns[i].size() != trajectories[i].tokens.size()) {
            throw ShapeError("value_loss: per-token return length mismatch");
        }
        total_tokens += trajectories[i].tokens.size();
    }
    if (total_tokens == 0) {
        throw ConfigError("value_loss: batch contains no tokens");
    }

    const std::size_t n = trajectories.size();
    std::vector<MlpParams> grad_slots(n, zeros_like(params.value_net));
    std::vector<double> loss_slots(n, 0.0);
    SlotErrors errors(n);

    for_each_index(n, [&](std::size_t i) {
        try {
            const Trajectory& traj = trajectories[i];
            if (traj.instance == nullptr) {
                throw ShapeError("value_loss: trajectory lacks its instance backref");
            }
            Token prev = params.feat.bos_index();
            for (std::size_t t = 0; t < traj.tokens.size(); ++t) {
                const std::vector<double> x = params.feat.features(
                    traj.instance->prompt_tokens, static_cast<int>(t), prev);
                MlpCache cache;
                const double v = mlp_forward(params.value_net, x, &cache)[0];
                const double err = v - returns[i][t];
                loss_slots[i] += 0.5 * err * err;
                const double grad_out[1] = {err};
                mlp_backward_accum(params.value_net, cache, grad_out, grad_slots[i]);
                prev = traj.tokens[t];
            }
        } catch (const std::exception& e) {
            errors.messages[i] = e.what();
        }
    });
    errors.rethrow_first();

    ValueResult result;
    result.grad = zeros_like(params.value_net);
    const double inv = 1.0 / static_cast<double>(total_tokens);
    for (std::size_t i = 0; i < n; ++i) {
        result.loss += loss_slots[i];
        result.grad.add_scaled(grad_slots[i], inv);
    }
    result.loss *= inv;
    return result;
}

HybridLogSigmaResult hybrid_log_sigma(double l_actor, double l_sft, double sigma_pg,
                                      double sigma_sft) {
    HybridLogSigmaResult r;
    r.w_pg = std::exp(-2.0 * sigma_pg);
    r.w_sft = std::exp(-2.0 * sigma_sft);
    r.l_total = r.w_pg * l_actor + r.w_sft * l_sft + sigma_pg + sigma_sft;
    r.d_sigma_pg = -2.0 * r.w_pg * l_actor + 1.0;
    r.d_sigma_sft = -2.0 * r.w_sft * l_sft + 1.0;
    return r;
}

HybridThetaResult hybrid_theta(double l_actor, double l_sft, double alpha) {
    HybridThetaResult r;
    r.w_pg = 1.0 / (1.0 + std::exp(-alpha));
    r.w_sft = 1.0 - r.w_pg;
    r.l_total = r.w_pg * l_actor + r.w_sft * l_sft;
    return r;
}

WeightedSftObjective weighted_sft_objective(double l_sft, double sigma_sft) {
    WeightedSftObjective r;
    r.weight = std::exp(-2.0 * sigma_sft);
    r.value = r.weight * l_sft + sigma_sft;
    r.d_sigma = -2.0 * r.weight * l_sft + 1.0;
    return r;
}

PerStepSftResult per_step_sft_update(PolicyParams& params, std::span<const SftItem> demos,
                                     double lr) {
    const SftResult sft = sft_loss(params, demos);
    const WeightedSftObjective obj = weighted_sft_objective(sft.loss, params.sigma_sft);
    params.net.add_scaled(sft.grad, -lr * obj.weight);
    params.sigma_sft = std::clamp(params.sigma_sft - lr * obj.d_sigma,
                                  -PolicyOptimizer::kSigmaLimit, PolicyOptimizer::kSigmaLimit);
    return {sft.loss, obj.value, obj.weight};
}

ExpertInjectionResult expert_injection(const PolicyParams& params,
                                       std::span<const ExpertItem> experts, double lambda) {
    ExpertInjectionResult result;
    result.grad = zeros_like(params.net);
    if (experts.empty() || lambda == 0.0) {
        return result;
    }
    const double inv = 1.0 / static_cast<double>(experts.size());
    std::vector<double> grad_logits(static_cast<std::size_t>(params.feat.vocab_size));
    for (const ExpertItem& item : experts) {
        if (item.reward == 0.0) {
            continue;  // zero-reward experts contribute nothing
        }
        const SequenceScore score = sequence_logprob(params, *item.instance, *item.tokens);
        result.loss_term -= lambda * item.reward * score.total * inv;
        const double coef = -lambda * item.reward * inv;
        for (std::size_t t = 0; t < item.tokens->size(); ++t) {
            const std::vector<double>& lp = score.log_dists[t];
            const std::size_t y = static_cast<std::size_t>((*item.tokens)[t]);
            for (std::size_t j = 0; j < grad_logits.size(); ++j) {
                const double onehot = j == y ? 1.0 : 0.0;
                grad_logits[j] = coef * (onehot - std::exp(lp[j]));
            }
            mlp_backward_accum(params.net, score.caches[t], grad_logits, result.grad);
        }
    }
    return result;
}

}  // namespace superrl
