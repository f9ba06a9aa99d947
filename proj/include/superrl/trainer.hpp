#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "superrl/adaptive_switch.hpp"
#include "superrl/env.hpp"
#include "superrl/losses.hpp"
#include "superrl/policy.hpp"

namespace superrl {

enum class Algo { PPO, GRPO };
enum class Regime { RL, SFT, SFT_then_RL, Hybrid, SuperRL };

std::string algo_name(Algo algo);
Algo algo_from_name(const std::string& name);
std::string regime_name(Regime regime);
Regime regime_from_name(const std::string& name);

struct TrainConfig {
    EnvConfig env;
    Algo algo = Algo::GRPO;
    Regime regime = Regime::SuperRL;
    HybridConfig hybrid;
    int batch_size = 32;
    int group_size = 5;  // candidates per prompt
    int steps = 500;
    int eval_every = 5;
    double lr = 1e-2;
    std::uint64_t seed = 1;
    // dataset and net shape (desk scale)
    int n_train = 256;
    int n_test = 32;
    int hidden = 32;

    void validate() const;
};

/// Row label used in comparison tables; Hybrid rows carry their fusion.
std::string regime_label(const TrainConfig& config);

struct StepRecord {
    int step = 0;
    double mean_reward = 0.0;
    double kl_mean = 0.0;
    double l_actor = 0.0;
    double l_sft = 0.0;
    double w_pg = 1.0;
    double w_sft = 0.0;
    double sigma_pg = 0.0;
    double sigma_sft = 0.0;
};

struct EvalRecord {
    int step = 0;
    double em_accuracy = 0.0;
};

struct RunLog {
    std::vector<StepRecord> steps;
    std::vector<EvalRecord> evals;
    std::optional<ActorChoice> probe;  // present for SuperRL runs

    double final_em() const;
};

/// Chronological line-delimited JSON; step records and eval records are
/// distinguished by their keys. Byte-stable for identical runs.
std::string runlog_to_jsonl(const RunLog& log);
void save_runlog(const RunLog& log, const std::string& path);
RunLog load_runlog(const std::string& path);

struct TrainOutput {
    RunLog log;
    PolicyParams params;
    Dataset dataset;
};

/// The dataset a config denotes; train(config) and the gen-data command both
/// derive it this way, so generated files replay exactly.
Dataset dataset_for(const TrainConfig& config);

/// Executes the configured regime for config.steps updates. Deterministic
/// given the seed; aborts with NumericError (naming the step) on NaN.
TrainOutput train(const TrainConfig& config);
TrainOutput train(const TrainConfig& config, const Dataset& dataset);

/// Offline fine-tuning (25 epochs, best checkpoint by eval EM, earliest on
/// ties), then RL from the selected checkpoint for rl_steps updates
/// (negative means config.steps).
TrainOutput train_sft_then_rl(const TrainConfig& config, int rl_steps = -1);

/// Runs just the k-step rollout probe (pure RL updates from a fresh policy)
/// and returns its statistics and actor decision.
std::pair<ProbeStats, ActorChoice> probe_run(const TrainConfig& config);

/// Greedy-decoding exact-match accuracy on a test set.
double evaluate(const PolicyParams& params, std::span<const TaskInstance> testset,
                const Canonicalizer& canon = Canonicalizer{});

struct KlStats {
    double kl_min = 0.0;
    double kl_max = 0.0;
    double kl_variance = 0.0;  // population variance of the per-step series
};

KlStats kl_stats(const RunLog& log);

/// s_0 = x_0, s_t = decay * s_{t-1} + (1 - decay) * x_t.
std::vector<double> smooth_ema(std::span<const double> series, double decay);

struct ComparisonRow {
    std::string regime;
    std::string env;
    double em = 0.0;
    double kl_min = 0.0;
    double kl_max = 0.0;
    double kl_var = 0.0;
};

struct Comparison {
    std::vector<ComparisonRow> rows;

    /// Fixed header: regime,env,em,kl_min,kl_max,kl_var
    std::string to_csv() const;
    /// Adds kl_var_delta_pct against the RL row where one exists.
    std::string to_json() const;
};

/// Trains every config (all must share env and seed) and reports EM on the
/// in-domain test set and on a freshly drawn transfer instance of the same
/// environment family, plus KL statistics. Rows are ordered by regime label.
/// jobs > 1 runs the configs on worker threads (kernels drop to serial to
/// avoid oversubscription); results are merged in the same deterministic
/// order either way.
Comparison compare_regimes(std::span<const TrainConfig> configs, int jobs = 1);

}  // namespace superrl
