// Command-line entry point: dataset generation, the rollout probe, training
// runs, regime comparisons, and default-config printing.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "superrl/cli_config.hpp"
#include "superrl/errors.hpp"
#include "superrl/trainer.hpp"

namespace fs = std::filesystem;
using namespace superrl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitSparse = 2;

// SUPERRL_OUT, when set, replaces the output root
fs::path resolve_out(const std::string& out_dir) {
    const char* root = std::getenv("SUPERRL_OUT");
    if (root != nullptr && *root != '\0') {
        return fs::path(root) / out_dir;
    }
    return fs::path(out_dir);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write: " + path.string());
    }
    out << content;
}

struct Overrides {
    std::uint64_t seed = 0;
    int steps = 0;
    std::string out;
    bool has_seed = false, has_steps = false, has_out = false;

    void apply(CliConfig& config) const {
        if (has_seed) config.train.seed = seed;
        if (has_steps) config.train.steps = steps;
        if (has_out) config.out_dir = out;
        config.train.validate();
    }
};

void add_overrides(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--seed", ov.seed, "override the config seed")
        ->each([&ov](const std::string&) { ov.has_seed = true; });
    cmd->add_option("--steps", ov.steps, "override the step budget")
        ->each([&ov](const std::string&) { ov.has_steps = true; });
    cmd->add_option("--out", ov.out, "override the output directory")
        ->each([&ov](const std::string&) { ov.has_out = true; });
}

int cmd_gen_data(const std::string& config_path, const Overrides& ov) {
    CliConfig config = load_config_file(config_path);
    ov.apply(config);
    const fs::path out = resolve_out(config.out_dir);
    fs::create_directories(out);

    const Dataset ds = dataset_for(config.train);
    save_instances_jsonl((out / "train.jsonl").string(), ds.train);
    save_instances_jsonl((out / "test.jsonl").string(), ds.test);
    save_demos_jsonl((out / "demos.jsonl").string(), ds.demos);

    nlohmann::json manifest{
        {"seed", config.train.seed},
        {"env",
         {{"kind", env_kind_name(config.train.env.kind)},
          {"vocab_size", config.train.env.vocab_size},
          {"answer_len", config.train.env.answer_len},
          {"prompt_space", config.train.env.prompt_space},
          {"demo_fraction", config.train.env.demo_fraction}}},
        {"n_train", config.train.n_train},
        {"n_test", config.train.n_test},
        {"files", {"train.jsonl", "test.jsonl", "demos.jsonl"}},
    };
    write_file(out / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote dataset to " << out.string() << "\n";
    return kExitOk;
}

Dataset load_dataset(const TrainConfig& train, const fs::path& out) {
    for (const char* name : {"train.jsonl", "test.jsonl", "demos.jsonl"}) {
        if (!fs::exists(out / name)) {
            throw ConfigError("dataset file missing (run gen-data first): " +
                              (out / name).string());
        }
    }
    Dataset ds;
    ds.config = train.env;
    ds.train = load_instances_jsonl((out / "train.jsonl").string());
    ds.test = load_instances_jsonl((out / "test.jsonl").string());
    ds.demos = load_demos_jsonl((out / "demos.jsonl").string());
    // loaded demos must still be reward-1 expert traces
    for (const DemoEntry& entry : ds.demos.entries) {
        for (const TaskInstance& inst : ds.train) {
            if (inst.prompt_id == entry.prompt_id &&
                reward_total(entry.tokens, inst, ds.config, ds.canon) != 1.0) {
                throw ConfigError("demo for prompt " + std::to_string(entry.prompt_id) +
                                  " does not score reward 1");
            }
        }
    }
    return ds;
}

int cmd_probe(const std::string& config_path, const Overrides& ov) {
    CliConfig config = load_config_file(config_path);
    ov.apply(config);
    const auto [stats, choice] = probe_run(config.train);
    const std::string report = probe_report_json(choice);
    std::cout << report << "\n";
    const fs::path out = resolve_out(config.out_dir);
    fs::create_directories(out);
    write_file(out / "probe.json", report + "\n");
    return choice.choice == Actor::HybridActor ? kExitSparse : kExitOk;
}

int cmd_train(const std::string& config_path, const Overrides& ov) {
    CliConfig config = load_config_file(config_path);
    ov.apply(config);
    const fs::path out = resolve_out(config.out_dir);
    const Dataset ds = load_dataset(config.train, out);

    const TrainOutput result = train(config.train, ds);
    save_runlog(result.log, (out / "runlog.jsonl").string());
    save_checkpoint(result.params, (out / "checkpoint.json").string());

    std::vector<double> em_series;
    for (const EvalRecord& rec : result.log.evals) {
        em_series.push_back(rec.em_accuracy);
    }
    const std::vector<double> smoothed = smooth_ema(em_series, 0.9);
    const KlStats stats = kl_stats(result.log);
    nlohmann::json summary{
        {"final_em", result.log.final_em()},
        {"smoothed_em", smoothed.empty() ? 0.0 : smoothed.back()},
        {"kl_min", stats.kl_min},
        {"kl_max", stats.kl_max},
        {"kl_variance", stats.kl_variance},
        {"steps", result.log.steps.size()},
    };
    if (result.log.probe.has_value()) {
        summary["probe"] = nlohmann::json::parse(probe_report_json(*result.log.probe));
    }
    write_file(out / "summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_compare(const std::string& config_dir, const Overrides& ov, int jobs) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(config_dir)) {
        if (entry.path().extension() == ".json") {
            paths.push_back(entry.path());
        }
    }
    if (paths.empty()) {
        throw ConfigError("no .json configs in " + config_dir);
    }
    std::sort(paths.begin(), paths.end());

    std::vector<TrainConfig> configs;
    for (const fs::path& path : paths) {
        CliConfig config = load_config_file(path.string());
        if (ov.has_seed) config.train.seed = ov.seed;
        if (ov.has_steps) config.train.steps = ov.steps;
        configs.push_back(config.train);
    }
    const Comparison cmp = compare_regimes(configs, jobs);

    const fs::path out = resolve_out(ov.has_out ? ov.out : config_dir);
    fs::create_directories(out);
    write_file(out / "comparison.csv", cmp.to_csv());
    write_file(out / "comparison.json", cmp.to_json() + "\n");
    std::cout << cmp.to_csv();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SuperRL desk-scale training harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string config_dir;
    int jobs = 1;
    Overrides ov;

    CLI::App* defaults_cmd = app.add_subcommand("defaults", "print the default config JSON");

    CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate dataset files");
    gen_cmd->add_option("config", config_path, "config JSON file")->required();
    add_overrides(gen_cmd, ov);

    CLI::App* probe_cmd =
        app.add_subcommand("probe", "run the rollout probe (exit 0 dense, 2 sparse)");
    probe_cmd->add_option("config", config_path, "config JSON file")->required();
    add_overrides(probe_cmd, ov);

    CLI::App* train_cmd = app.add_subcommand("train", "run one training config");
    train_cmd->add_option("config", config_path, "config JSON file")->required();
    add_overrides(train_cmd, ov);

    CLI::App* compare_cmd = app.add_subcommand("compare", "train and compare all configs");
    compare_cmd->add_option("config_dir", config_dir, "directory of config JSON files")
        ->required();
    compare_cmd->add_option("--jobs", jobs, "worker threads for runs");
    add_overrides(compare_cmd, ov);

    CLI11_PARSE(app, argc, argv);

    try {
        if (defaults_cmd->parsed()) {
            std::cout << config_to_json_text(CliConfig{}) << "\n";
            return kExitOk;
        }
        if (gen_cmd->parsed()) return cmd_gen_data(config_path, ov);
        if (probe_cmd->parsed()) return cmd_probe(config_path, ov);
        if (train_cmd->parsed()) return cmd_train(config_path, ov);
        if (compare_cmd->parsed()) return cmd_compare(config_dir, ov, jobs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
