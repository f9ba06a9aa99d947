#pragma once

#include <span>
#include <string>
#include <vector>

#include "superrl/env.hpp"
#include "superrl/mlp.hpp"
#include "superrl/rng.hpp"

namespace superrl {

/// State featurization: one-hot(prompt tokens, one slot each) ++
/// one-hot(position) ++ one-hot(previous token, with a begin-of-sequence
/// slot). Prompt identity enters through its token spelling, so the policy
/// can generalize what it learns to prompts it never trained on.
struct Featurizer {
    int prompt_width = 0;
    int max_positions = 0;
    int vocab_size = 0;

    int input_dim() const {
        return prompt_width * vocab_size + max_positions + vocab_size + 1;
    }
    int bos_index() const { return vocab_size; }

    /// prev == bos_index() marks the first step.
    std::vector<double> features(std::span<const Token> prompt_tokens, int position,
                                 Token prev) const;

    bool operator==(const Featurizer&) const = default;
};

/// Weights of the autoregressive categorical policy plus value head and the
/// two learnable log-deviations used by the uncertainty-weighted fusion.
struct PolicyParams {
    Featurizer feat;
    MlpParams net;        // |V| logits
    MlpParams value_net;  // scalar baseline
    double sigma_pg = 0.0;
    double sigma_sft = 0.0;

    /// Actor and critic share first-layer initialization (same draw).
    static PolicyParams init(const EnvConfig& env, int hidden, double init_scale, Rng rng);
};

/// Frozen copy of the actor net at snapshot time.
class ReferencePolicy {
public:
    ReferencePolicy() = default;
    ReferencePolicy(Featurizer feat, MlpParams net) : feat_(feat), net_(std::move(net)) {}

    double logprob(const TaskInstance& instance, int position, Token prev, Token token) const;
    const Featurizer& featurizer() const { return feat_; }

private:
    Featurizer feat_;
    MlpParams net_;
};

ReferencePolicy snapshot_reference(const PolicyParams& params);

/// One sampled response. The instance backref is runtime-only plumbing for
/// feature reconstruction; it is never serialized.
struct Trajectory {
    int prompt_id = 0;
    const TaskInstance* instance = nullptr;
    TokenSeq tokens;
    std::vector<double> logprobs;      // at the realized tokens, nats
    std::vector<double> ref_logprobs;  // same tokens under the frozen reference
    std::vector<double> rewards;
    double total_reward = 0.0;
    double advantage = 0.0;
    int group_id = 0;
};

struct SequenceScore {
    double total = 0.0;
    std::vector<double> per_step;
    std::vector<MlpCache> caches;                // one per step
    std::vector<std::vector<double>> log_dists;  // full log-softmax per step
};

/// Log-probability of a token sequence under the policy, with the activation
/// caches needed for exact backprop.
SequenceScore sequence_logprob(const PolicyParams& params, const TaskInstance& instance,
                               const TokenSeq& tokens);

/// G independent trajectories for one prompt at temperature 1.0, sharing
/// group_id. Trajectory g draws from rng.split(g), so the group is
/// exchangeable under permutation of substream ids. Rewards are filled by
/// the caller.
std::vector<Trajectory> sample_group(const PolicyParams& params, const ReferencePolicy& ref,
                                     const TaskInstance& instance, int G, Rng rng,
                                     int group_id = 0);

/// Greedy (argmax) decode, the temperature-0 evaluation convention.
TokenSeq greedy_decode(const PolicyParams& params, const TaskInstance& instance);

/// Scalar baseline for the state (prompt, step, prev token).
double value_estimate(const PolicyParams& params, const TaskInstance& instance, int step,
                      Token prev = -1);

// checkpoint: flat JSON map of named real arrays plus the two sigma scalars
void save_checkpoint(const PolicyParams& params, const std::string& path);
PolicyParams load_checkpoint(const std::string& path, const Featurizer& expected);

}  // namespace superrl
