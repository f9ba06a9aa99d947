#include "superrl/adaptive_switch.hpp"

#include "json.hpp"
#include "superrl/errors.hpp"

namespace superrl {

void SwitchConfig::validate() const {
    if (k < 1) {
        throw ConfigError("switch: k must be >= 1");
    }
    if (m < 1 || m > k) {
        throw ConfigError("switch: m must satisfy 1 <= m <= k");
    }
    if (increase_threshold < 0 || avg_threshold < 0.0) {
        throw ConfigError("switch: thresholds must be >= 0");
    }
}

SwitchConfig default_config(int batch_size) {
    if (batch_size < 1) {
        throw ConfigError("default_config: batch_size must be >= 1");
    }
    if (batch_size > 32) {
        return SwitchConfig{10, 10, 3, 0.1};
    }
    return SwitchConfig{50, 10, 20, 0.2};
}

ProbeStats probe_statistics(std::span<const double> avg_rewards, int m) {
    if (m < 1 || avg_rewards.size() < static_cast<std::size_t>(m)) {
        throw ConfigError("probe_statistics: need at least m reward entries");
    }
    ProbeStats stats;
    stats.avg_rewards.assign(avg_rewards.begin(), avg_rewards.end());
    for (std::size_t i = 1; i < avg_rewards.size(); ++i) {
        if (avg_rewards[i] > avg_rewards[i - 1]) {
            ++stats.increase_num;
        }
    }
    double sum = 0.0;
    for (std::size_t i = avg_rewards.size() - static_cast<std::size_t>(m);
         i < avg_rewards.size(); ++i) {
        sum += avg_rewards[i];
    }
    stats.recent_avg_reward = sum / static_cast<double>(m);
    return stats;
}

std::string actor_name(Actor actor) {
    return actor == Actor::VanillaRL ? "VanillaRL" : "HybridActor";
}

ActorChoice decide_actor(const ProbeStats& stats, const SwitchConfig& config) {
    config.validate();
    ActorChoice choice;
    choice.stats = stats;
    choice.config = config;
    const bool sparse = stats.increase_num < config.increase_threshold &&
                        stats.recent_avg_reward < config.avg_threshold;
    choice.choice = sparse ? Actor::HybridActor : Actor::VanillaRL;
    return choice;
}

std::string probe_report_json(const ActorChoice& choice) {
    nlohmann::json j{
        {"avg_rewards", choice.stats.avg_rewards},
        {"increase_num", choice.stats.increase_num},
        {"recent_avg_reward", choice.stats.recent_avg_reward},
        {"thresholds",
         {{"k", choice.config.k},
          {"m", choice.config.m},
          {"increase_threshold", choice.config.increase_threshold},
          {"avg_threshold", choice.config.avg_threshold}}},
        {"choice", actor_name(choice.choice)},
    };
    return j.dump();
}

std::pair<ProbeStats, ActorChoice> run_probe(const ProbeStepFn& step_fn,
                                             const SwitchConfig& config) {
    config.validate();
    std::vector<double> avg_rewards;
    avg_rewards.reserve(static_cast<std::size_t>(config.k));
    for (int step = 0; step < config.k; ++step) {
        avg_rewards.push_back(step_fn(step));
    }
    ProbeStats stats = probe_statistics(avg_rewards, config.m);
    ActorChoice choice = decide_actor(stats, config);
    return {stats, choice};
}

}  // namespace superrl
