#include "superrl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>

#include "json.hpp"
#include "superrl/errors.hpp"
#include "superrl/optimizer.hpp"
#include "superrl/parallel.hpp"

namespace superrl {

std::string algo_name(Algo algo) { return algo == Algo::PPO ? "PPO" : "GRPO"; }

Algo algo_from_name(const std::string& name) {
    if (name == "PPO") return Algo::PPO;
    if (name == "GRPO") return Algo::GRPO;
    throw ConfigError("unknown algo: " + name);
}

std::string regime_name(Regime regime) {
    switch (regime) {
        case Regime::RL: return "RL";
        case Regime::SFT: return "SFT";
        case Regime::SFT_then_RL: return "SFT_then_RL";
        case Regime::Hybrid: return "Hybrid";
        case Regime::SuperRL: return "SuperRL";
    }
    return "?";
}

Regime regime_from_name(const std::string& name) {
    if (name == "RL") return Regime::RL;
    if (name == "SFT") return Regime::SFT;
    if (name == "SFT_then_RL") return Regime::SFT_then_RL;
    if (name == "Hybrid") return Regime::Hybrid;
    if (name == "SuperRL") return Regime::SuperRL;
    throw ConfigError("unknown regime: " + name);
}

std::string regime_label(const TrainConfig& config) {
    if (config.regime == Regime::Hybrid) {
        return "Hybrid-" + fusion_name(config.hybrid.fusion);
    }
    return regime_name(config.regime);
}

void TrainConfig::validate() const {
    env.validate();
    hybrid.validate();
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (group_size < 1) throw ConfigError("group_size must be >= 1");
    if (algo == Algo::GRPO && group_size < 2) {
        throw ConfigError("GRPO requires group_size >= 2 for nondegenerate advantages");
    }
    if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
    if (!(std::isfinite(lr) && lr >= 0.0)) throw ConfigError("lr must be finite and >= 0");
    if (n_train < 1 || n_test < 1) throw ConfigError("n_train and n_test must be >= 1");
    if (hidden < 1) throw ConfigError("hidden must be >= 1");
}

double RunLog::final_em() const { return evals.empty() ? 0.0 : evals.back().em_accuracy; }

namespace {

constexpr double kInitScale = 0.1;
constexpr int kSftEpochs = 25;
constexpr std::uint64_t kTransferSeedOffset = 0x7157;

Rng dataset_rng(std::uint64_t seed) { return Rng(seed).split(0); }

// collects failure messages from parallel loop bodies (exceptions must not
// cross the OpenMP region)
void rethrow_first(const std::vector<std::string>& messages) {
    for (const std::string& m : messages) {
        if (!m.empty()) throw NumericError(m);
    }
}

struct Runner {
    const TrainConfig& cfg;
    const Dataset& ds;
    PolicyParams params;
    PolicyOptimizer opt;
    ReferencePolicy ref;
    Rng loop_rng;
    RunLog log;
    int global_step = 0;
    int last_eval_step = -1;

    std::vector<std::pair<const TaskInstance*, const TokenSeq*>> demo_items;

    Runner(const TrainConfig& config, const Dataset& dataset)
        : cfg(config), ds(dataset), loop_rng(Rng(config.seed).split(2)) {
        params = PolicyParams::init(cfg.env, cfg.hidden, kInitScale, Rng(cfg.seed).split(1));
        params.sigma_pg = cfg.hybrid.sigma_init_pg;
        params.sigma_sft = cfg.hybrid.sigma_init_sft;
        opt = PolicyOptimizer(params);
        for (const DemoEntry& entry : ds.demos.entries) {
            const TaskInstance* inst = nullptr;
            for (const TaskInstance& candidate : ds.train) {
                if (candidate.prompt_id == entry.prompt_id) {
                    inst = &candidate;
                    break;
                }
            }
            if (inst == nullptr) {
                throw ConfigError("demo refers to a prompt outside the training set");
            }
            demo_items.push_back({inst, &entry.tokens});
        }
    }

    void snapshot() { ref = snapshot_reference(params); }

    std::vector<SftItem> demo_batch(Rng rng) {
        std::vector<SftItem> batch;
        if (demo_items.empty()) {
            throw ConfigError("hybrid update requested without demos");
        }
        if (demo_items.size() <= static_cast<std::size_t>(cfg.batch_size)) {
            for (const auto& [inst, tokens] : demo_items) {
                batch.push_back({inst, tokens});
            }
        } else {
            for (int i = 0; i < cfg.batch_size; ++i) {
                const auto& [inst, tokens] = demo_items[rng.uniform_index(demo_items.size())];
                batch.push_back({inst, tokens});
            }
        }
        return batch;
    }

    void check_finite(const StepRecord& rec) {
        const double fields[] = {rec.mean_reward, rec.kl_mean, rec.l_actor,  rec.l_sft,
                                 rec.w_pg,        rec.w_sft,   rec.sigma_pg, rec.sigma_sft};
        bool ok = all_finite(fields) && all_finite(params.net) && all_finite(params.value_net) &&
                  std::isfinite(params.sigma_pg) && std::isfinite(params.sigma_sft);
        if (!ok) {
            throw NumericError("training aborted: non-finite value at step " +
                               std::to_string(rec.step));
        }
    }

    void maybe_eval() {
        if (global_step % cfg.eval_every == 0) {
            record_eval();
        }
    }

    void record_eval() {
        const int at = global_step - 1;
        if (at == last_eval_step) return;
        log.evals.push_back({at, evaluate(params, ds.test, ds.canon)});
        last_eval_step = at;
    }

    // one supervised update on a demo batch
    void sft_step() {
        Rng step_rng = loop_rng.split(static_cast<std::uint64_t>(global_step));
        const std::vector<SftItem> batch = demo_batch(step_rng.split(2));
        const SftResult sft = sft_loss(params, batch);
        opt.step_net(params, sft.grad, cfg.lr);

        StepRecord rec;
        rec.step = global_step;
        rec.l_sft = sft.loss;
        rec.l_actor = 0.0;
        rec.w_pg = 0.0;
        rec.w_sft = 1.0;
        rec.sigma_pg = params.sigma_pg;
        rec.sigma_sft = params.sigma_sft;
        check_finite(rec);
        log.steps.push_back(rec);
        ++global_step;
        maybe_eval();
    }

    // one RL update, optionally fused with the SFT signal; returns the mean
    // batch reward (the probe statistic)
    double training_step(bool use_fusion) {
        Rng step_rng = loop_rng.split(static_cast<std::uint64_t>(global_step));

        // batch of prompts
        Rng batch_rng = step_rng.split(0);
        std::vector<const TaskInstance*> batch;
        batch.reserve(static_cast<std::size_t>(cfg.batch_size));
        for (int i = 0; i < cfg.batch_size; ++i) {
            batch.push_back(&ds.train[batch_rng.uniform_index(ds.train.size())]);
        }

        // rollouts fan out over an immutable params snapshot
        const std::size_t n_groups = batch.size();
        std::vector<std::vector<Trajectory>> groups(n_groups);
        std::vector<std::string> errors(n_groups);
        for_each_index(n_groups, [&](std::size_t i) {
            try {
                groups[i] = sample_group(params, ref, *batch[i], cfg.group_size,
                                         step_rng.split(1 + i), static_cast<int>(i));
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        });
        rethrow_first(errors);

        // rewards
        double reward_sum = 0.0;
        for (std::size_t i = 0; i < n_groups; ++i) {
            for (Trajectory& traj : groups[i]) {
                if (cfg.env.kind == EnvKind::DenseChain) {
                    traj.rewards = dense_reward(traj.tokens, *batch[i]);
                } else {
                    traj.rewards.assign(traj.tokens.size(), 0.0);
                    traj.rewards.back() = sparse_reward(traj.tokens, *batch[i], ds.canon);
                }
                traj.total_reward =
                    std::accumulate(traj.rewards.begin(), traj.rewards.end(), 0.0);
                reward_sum += traj.total_reward;
            }
        }
        const double mean_reward =
            reward_sum / static_cast<double>(n_groups * static_cast<std::size_t>(cfg.group_size));

        // flatten (fixed order) and compute advantages
        std::vector<Trajectory> trajs;
        trajs.reserve(n_groups * static_cast<std::size_t>(cfg.group_size));
        std::vector<std::vector<double>> advantages;
        std::vector<std::vector<double>> returns;
        for (std::size_t i = 0; i < n_groups; ++i) {
            std::vector<double> totals;
            totals.reserve(groups[i].size());
            for (const Trajectory& traj : groups[i]) {
                totals.push_back(traj.total_reward);
            }
            std::vector<double> group_adv;
            if (cfg.algo == Algo::GRPO) {
                group_adv = grpo_advantages(totals);
            }
            for (std::size_t g = 0; g < groups[i].size(); ++g) {
                Trajectory& traj = groups[i][g];
                std::vector<double> ret = returns_to_go(traj);
                std::vector<double> adv(traj.tokens.size(), 0.0);
                if (cfg.algo == Algo::GRPO) {
                    std::fill(adv.begin(), adv.end(), group_adv[g]);
                    traj.advantage = group_adv[g];
                } else {
                    Token prev = params.feat.bos_index();
                    for (std::size_t t = 0; t < traj.tokens.size(); ++t) {
                        adv[t] = ret[t] -
                                 value_estimate(params, *batch[i], static_cast<int>(t), prev);
                        prev = traj.tokens[t];
                    }
                    traj.advantage = adv.empty() ? 0.0 : adv.front();
                }
                returns.push_back(std::move(ret));
                advantages.push_back(std::move(adv));
                trajs.push_back(std::move(traj));
            }
        }

        const ActorResult actor = ppo_objective(params, trajs, advantages, cfg.hybrid);
        ValueResult value;
        if (cfg.algo == Algo::PPO) {
            value = value_loss(params, trajs, returns);
        }

        StepRecord rec;
        rec.step = global_step;
        rec.mean_reward = mean_reward;
        rec.kl_mean = actor.kl_mean;
        rec.l_actor = actor.loss;
        rec.sigma_pg = params.sigma_pg;
        rec.sigma_sft = params.sigma_sft;

        if (!use_fusion) {
            opt.step_net(params, actor.grad, cfg.lr);
            rec.w_pg = 1.0;
            rec.w_sft = 0.0;
        } else {
            switch (cfg.hybrid.fusion) {
                case Fusion::LogSigma: {
                    const SftResult sft = sft_loss(params, demo_batch(step_rng.split(2)));
                    const HybridLogSigmaResult fuse = hybrid_log_sigma(
                        actor.loss, sft.loss, params.sigma_pg, params.sigma_sft);
                    MlpParams grad = actor.grad;
                    grad.set_zero();
                    grad.add_scaled(actor.grad, fuse.w_pg);
                    grad.add_scaled(sft.grad, fuse.w_sft);
                    opt.step_net(params, grad, cfg.lr);
                    opt.step_sigmas(params, fuse.d_sigma_pg, fuse.d_sigma_sft, cfg.lr);
                    rec.l_sft = sft.loss;
                    rec.w_pg = fuse.w_pg;
                    rec.w_sft = fuse.w_sft;
                    break;
                }
                case Fusion::Theta: {
                    const SftResult sft = sft_loss(params, demo_batch(step_rng.split(2)));
                    const HybridThetaResult fuse =
                        hybrid_theta(actor.loss, sft.loss, cfg.hybrid.alpha);
                    MlpParams grad = actor.grad;
                    grad.set_zero();
                    grad.add_scaled(actor.grad, fuse.w_pg);
                    grad.add_scaled(sft.grad, fuse.w_sft);
                    opt.step_net(params, grad, cfg.lr);
                    rec.l_sft = sft.loss;
                    rec.w_pg = fuse.w_pg;
                    rec.w_sft = fuse.w_sft;
                    break;
                }
                case Fusion::PerStep: {
                    // full-weight RL update, then a separate weighted SFT step
                    opt.step_net(params, actor.grad, cfg.lr);
                    const PerStepSftResult ps =
                        per_step_sft_update(params, demo_batch(step_rng.split(2)), cfg.lr);
                    rec.l_sft = ps.l_sft;
                    rec.w_pg = 1.0;
                    rec.w_sft = ps.weight;
                    break;
                }
                case Fusion::ExpertInject: {
                    const std::vector<SftItem> demo = demo_batch(step_rng.split(2));
                    std::vector<ExpertItem> experts;
                    experts.reserve(demo.size());
                    for (const SftItem& item : demo) {
                        const double r =
                            reward_total(*item.tokens, *item.instance, cfg.env, ds.canon);
                        experts.push_back({item.instance, item.tokens, r});
                    }
                    const ExpertInjectionResult inj =
                        expert_injection(params, experts, cfg.hybrid.lambda);
                    MlpParams grad = actor.grad;
                    grad.set_zero();
                    grad.add_scaled(actor.grad, 1.0);
                    grad.add_scaled(inj.grad, 1.0);
                    opt.step_net(params, grad, cfg.lr);
                    rec.l_actor = actor.loss + inj.loss_term;
                    rec.l_sft = inj.loss_term;
                    rec.w_pg = 1.0;
                    rec.w_sft = cfg.hybrid.lambda;
                    break;
                }
            }
        }
        if (cfg.algo == Algo::PPO) {
            opt.step_value(params, value.grad, cfg.lr);
        }

        rec.sigma_pg = params.sigma_pg;
        rec.sigma_sft = params.sigma_sft;
        check_finite(rec);
        log.steps.push_back(rec);
        ++global_step;
        maybe_eval();
        return mean_reward;
    }

    void finish() {
        if (last_eval_step != global_step - 1) {
            record_eval();
        }
    }
};

void require_demos(const TrainConfig& cfg, const Dataset& ds) {
    const bool needs = cfg.regime == Regime::SFT || cfg.regime == Regime::SFT_then_RL ||
                       cfg.regime == Regime::Hybrid || cfg.regime == Regime::SuperRL;
    if (needs && ds.demos.empty()) {
        throw ConfigError(regime_name(cfg.regime) +
                          " requires a nonempty demo set (demo_fraction too small?)");
    }
}

}  // namespace

Dataset dataset_for(const TrainConfig& config) {
    config.validate();
    return make_dataset(config.env, config.n_train, config.n_test, dataset_rng(config.seed));
}

TrainOutput train(const TrainConfig& config) {
    return train(config, dataset_for(config));
}

namespace {
TrainOutput run_sft_then_rl(const TrainConfig& config, const Dataset& ds, int rl_steps);
}  // namespace

TrainOutput train(const TrainConfig& config, const Dataset& dataset) {
    config.validate();
    if (!(dataset.config == config.env)) {
        throw ConfigError("dataset was generated for a different env config");
    }
    require_demos(config, dataset);
    // the SFT baseline is the offline stage of SFT_then_RL with no RL steps
    if (config.regime == Regime::SFT_then_RL) {
        return run_sft_then_rl(config, dataset, -1);
    }
    if (config.regime == Regime::SFT) {
        return run_sft_then_rl(config, dataset, 0);
    }

    Runner runner(config, dataset);
    runner.snapshot();

    switch (config.regime) {
        case Regime::RL: {
            for (int s = 0; s < config.steps; ++s) {
                runner.training_step(false);
            }
            break;
        }
        case Regime::Hybrid: {
            for (int s = 0; s < config.steps; ++s) {
                runner.training_step(true);
            }
            break;
        }
        case Regime::SuperRL: {
            const SwitchConfig sw = default_config(config.batch_size);
            if (config.steps <= sw.k) {
                throw ConfigError("SuperRL needs steps > probe length k=" +
                                  std::to_string(sw.k));
            }
            auto [stats, choice] =
                run_probe([&](int) { return runner.training_step(false); }, sw);
            runner.log.probe = choice;
            const bool hybrid = choice.choice == Actor::HybridActor;
            for (int s = sw.k; s < config.steps; ++s) {
                runner.training_step(hybrid);
            }
            break;
        }
        default:
            throw ConfigError("unhandled regime");
    }
    runner.finish();
    return {std::move(runner.log), std::move(runner.params), dataset};
}

TrainOutput train_sft_then_rl(const TrainConfig& config, int rl_steps) {
    const Dataset ds = dataset_for(config);
    require_demos(config, ds);
    return run_sft_then_rl(config, ds, rl_steps);
}

namespace {

TrainOutput run_sft_then_rl(const TrainConfig& config, const Dataset& ds, int rl_steps) {
    Runner runner(config, ds);

    // offline stage: 25 epochs, best checkpoint by eval EM (earliest on ties)
    const int epoch_steps = std::max(1, config.steps / kSftEpochs);
    double best_em = -1.0;
    PolicyParams best = runner.params;
    for (int epoch = 0; epoch < kSftEpochs; ++epoch) {
        for (int s = 0; s < epoch_steps; ++s) {
            runner.sft_step();
        }
        runner.record_eval();
        const double em = runner.log.evals.back().em_accuracy;
        if (em > best_em) {
            best_em = em;
            best = runner.params;
        }
    }
    runner.params = std::move(best);

    // RL continues from the selected checkpoint against a fresh reference
    runner.snapshot();
    const int n_rl = rl_steps < 0 ? config.steps : rl_steps;
    for (int s = 0; s < n_rl; ++s) {
        runner.training_step(false);
    }
    if (n_rl == 0) {
        // re-evaluate so the log ends with the selected checkpoint's score
        runner.last_eval_step = -2;
    }
    runner.finish();
    return {std::move(runner.log), std::move(runner.params), ds};
}

}  // namespace

std::pair<ProbeStats, ActorChoice> probe_run(const TrainConfig& config) {
    const Dataset ds = dataset_for(config);
    Runner runner(config, ds);
    runner.snapshot();
    const SwitchConfig sw = default_config(config.batch_size);
    return run_probe([&](int) { return runner.training_step(false); }, sw);
}

double evaluate(const PolicyParams& params, std::span<const TaskInstance> testset,
                const Canonicalizer& canon) {
    if (testset.empty()) {
        throw ConfigError("evaluate: empty test set");
    }
    std::vector<char> hit(testset.size(), 0);
    std::vector<std::string> errors(testset.size());
    for_each_index(testset.size(), [&](std::size_t i) {
        try {
            const TokenSeq response = greedy_decode(params, testset[i]);
            hit[i] = sparse_reward(response, testset[i], canon) == 1.0 ? 1 : 0;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    rethrow_first(errors);
    std::size_t count = 0;
    for (char h : hit) count += static_cast<std::size_t>(h);
    return static_cast<double>(count) / static_cast<double>(testset.size());
}

KlStats kl_stats(const RunLog& log) {
    if (log.steps.size() < 2) {
        throw ConfigError("kl_stats: need at least 2 recorded steps");
    }
    KlStats stats;
    stats.kl_min = log.steps.front().kl_mean;
    stats.kl_max = log.steps.front().kl_mean;
    double mean = 0.0;
    for (const StepRecord& rec : log.steps) {
        stats.kl_min = std::min(stats.kl_min, rec.kl_mean);
        stats.kl_max = std::max(stats.kl_max, rec.kl_mean);
        mean += rec.kl_mean;
    }
    mean /= static_cast<double>(log.steps.size());
    double var = 0.0;
    for (const StepRecord& rec : log.steps) {
        var += (rec.kl_mean - mean) * (rec.kl_mean - mean);
    }
    stats.kl_variance = var / static_cast<double>(log.steps.size());
    return stats;
}

std::vector<double> smooth_ema(std::span<const double> series, double decay) {
    if (!(decay > 0.0 && decay < 1.0)) {
        throw ConfigError("smooth_ema: decay must lie in (0, 1)");
    }
    std::vector<double> out(series.begin(), series.end());
    for (std::size_t t = 1; t < out.size(); ++t) {
        out[t] = decay * out[t - 1] + (1.0 - decay) * series[t];
    }
    return out;
}

namespace {

nlohmann::json step_record_json(const StepRecord& rec) {
    return nlohmann::json{
        {"step", rec.step},         {"mean_reward", rec.mean_reward},
        {"kl_mean", rec.kl_mean},   {"l_actor", rec.l_actor},
        {"l_sft", rec.l_sft},       {"w_pg", rec.w_pg},
        {"w_sft", rec.w_sft},       {"sigma_pg", rec.sigma_pg},
        {"sigma_sft", rec.sigma_sft}};
}

}  // namespace

std::string runlog_to_jsonl(const RunLog& log) {
    std::string out;
    std::size_t next_eval = 0;
    for (const StepRecord& rec : log.steps) {
        out += step_record_json(rec).dump();
        out += "\n";
        while (next_eval < log.evals.size() && log.evals[next_eval].step <= rec.step) {
            out += nlohmann::json{{"step", log.evals[next_eval].step},
                                  {"em_accuracy", log.evals[next_eval].em_accuracy}}
                       .dump();
            out += "\n";
            ++next_eval;
        }
    }
    for (; next_eval < log.evals.size(); ++next_eval) {
        out += nlohmann::json{{"step", log.evals[next_eval].step},
                              {"em_accuracy", log.evals[next_eval].em_accuracy}}
                   .dump();
        out += "\n";
    }
    return out;
}

void save_runlog(const RunLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write run log: " + path);
    }
    out << runlog_to_jsonl(log);
}

RunLog load_runlog(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read run log: " + path);
    }
    RunLog log;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        if (j.contains("em_accuracy")) {
            log.evals.push_back({j.at("step").get<int>(), j.at("em_accuracy").get<double>()});
        } else {
            StepRecord rec;
            rec.step = j.at("step").get<int>();
            rec.mean_reward = j.at("mean_reward").get<double>();
            rec.kl_mean = j.at("kl_mean").get<double>();
            rec.l_actor = j.at("l_actor").get<double>();
            rec.l_sft = j.at("l_sft").get<double>();
            rec.w_pg = j.at("w_pg").get<double>();
            rec.w_sft = j.at("w_sft").get<double>();
            rec.sigma_pg = j.at("sigma_pg").get<double>();
            rec.sigma_sft = j.at("sigma_sft").get<double>();
            log.steps.push_back(rec);
        }
    }
    return log;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::string Comparison::to_csv() const {
    std::string out = "regime,env,em,kl_min,kl_max,kl_var\n";
    for (const ComparisonRow& row : rows) {
        out += row.regime + "," + row.env + "," + format_double(row.em) + "," +
               format_double(row.kl_min) + "," + format_double(row.kl_max) + "," +
               format_double(row.kl_var) + "\n";
    }
    return out;
}

std::string Comparison::to_json() const {
    // variance delta (%) against the RL row, the Table-2-style comparison
    double rl_var = -1.0;
    for (const ComparisonRow& row : rows) {
        if (row.regime == "RL") {
            rl_var = row.kl_var;
            break;
        }
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const ComparisonRow& row : rows) {
        nlohmann::json j{{"regime", row.regime}, {"env", row.env},       {"em", row.em},
                         {"kl_min", row.kl_min}, {"kl_max", row.kl_max}, {"kl_var", row.kl_var}};
        if (rl_var > 0.0 && row.regime != "RL") {
            j["kl_var_delta_pct"] = (row.kl_var - rl_var) / rl_var * 100.0;
        }
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

Comparison compare_regimes(std::span<const TrainConfig> configs, int jobs) {
    if (configs.empty()) {
        throw ConfigError("compare_regimes: need at least one config");
    }
    for (const TrainConfig& cfg : configs) {
        if (!(cfg.env == configs[0].env) || cfg.seed != configs[0].seed) {
            throw ConfigError("compare_regimes: configs must share env and seed");
        }
    }

    // held-out transfer instance: same family, freshly drawn task
    const Dataset transfer =
        make_dataset(configs[0].env, configs[0].n_train, configs[0].n_test,
                     dataset_rng(configs[0].seed + kTransferSeedOffset));
    const std::string kind = env_kind_name(configs[0].env.kind);

    std::vector<TrainOutput> outputs(configs.size());
    if (jobs > 1) {
        // runs are independent; inner kernels go serial while worker threads
        // take over the parallelism
        const ExecMode saved = exec_mode();
        set_exec_mode(ExecMode::Serial);
        std::vector<std::future<TrainOutput>> futures;
        futures.reserve(configs.size());
        for (const TrainConfig& cfg : configs) {
            futures.push_back(std::async(std::launch::async, [&cfg] { return train(cfg); }));
        }
        for (std::size_t i = 0; i < futures.size(); ++i) {
            outputs[i] = futures[i].get();
        }
        set_exec_mode(saved);
    } else {
        for (std::size_t i = 0; i < configs.size(); ++i) {
            outputs[i] = train(configs[i]);
        }
    }

    Comparison cmp;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const TrainOutput& out = outputs[i];
        const KlStats stats = kl_stats(out.log);
        const double em_in = evaluate(out.params, out.dataset.test, out.dataset.canon);
        const double em_tr = evaluate(out.params, transfer.test, transfer.canon);
        const std::string label = regime_label(configs[i]);
        cmp.rows.push_back({label, kind, em_in, stats.kl_min, stats.kl_max, stats.kl_variance});
        cmp.rows.push_back(
            {label, kind + "-transfer", em_tr, stats.kl_min, stats.kl_max, stats.kl_variance});
    }
    std::sort(cmp.rows.begin(), cmp.rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        return a.regime != b.regime ? a.regime < b.regime : a.env < b.env;
    });
    return cmp;
}

}  // namespace superrl
