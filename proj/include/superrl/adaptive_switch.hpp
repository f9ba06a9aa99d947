#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace superrl {

struct SwitchConfig {
    int k = 50;                   // probe rollout steps
    int m = 10;                   // recent-window length
    int increase_threshold = 20;  // reward-increase count threshold
    double avg_threshold = 0.2;   // recent average reward threshold

    void validate() const;
};

/// Empirically determined thresholds: large batches probe for 10 steps with
/// thresholds (3, 0.1); batch sizes of 32 and below probe for 50 steps with
/// thresholds (20, 0.2).
SwitchConfig default_config(int batch_size);

struct ProbeStats {
    std::vector<double> avg_rewards;  // mean batch reward at each probe step
    int increase_num = 0;             // strict increases between consecutive steps
    double recent_avg_reward = 0.0;   // mean of the last m entries
};

ProbeStats probe_statistics(std::span<const double> avg_rewards, int m);

enum class Actor { VanillaRL, HybridActor };

std::string actor_name(Actor actor);

struct ActorChoice {
    Actor choice = Actor::VanillaRL;
    ProbeStats stats;
    SwitchConfig config;
};

/// HybridActor iff increase_num < increase_threshold AND
/// recent_avg_reward < avg_threshold; VanillaRL otherwise.
ActorChoice decide_actor(const ProbeStats& stats, const SwitchConfig& config);

/// Serialized probe report:
/// {avg_rewards, increase_num, recent_avg_reward, thresholds, choice}.
std::string probe_report_json(const ActorChoice& choice);

/// step_fn runs one pure-RL training step and returns its mean batch reward.
using ProbeStepFn = std::function<double(int step)>;

/// Executes the k-step rollout probe and classifies the environment. The
/// probe's training steps count toward the caller's total budget.
std::pair<ProbeStats, ActorChoice> run_probe(const ProbeStepFn& step_fn,
                                             const SwitchConfig& config);

}  // namespace superrl
