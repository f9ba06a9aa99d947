#include "superrl/cli_config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"
#include "superrl/errors.hpp"

namespace superrl {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& scope) {
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw ConfigError("unknown config key: " + scope + key);
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

EnvConfig env_from_json(const json& j) {
    reject_unknown(j, {"kind", "vocab_size", "answer_len", "prompt_space", "demo_fraction"},
                   "env.");
    EnvConfig env;
    if (j.contains("kind")) {
        env.kind = env_kind_from_name(j.at("kind").get<std::string>());
    }
    read(j, "vocab_size", env.vocab_size);
    read(j, "answer_len", env.answer_len);
    read(j, "prompt_space", env.prompt_space);
    read(j, "demo_fraction", env.demo_fraction);
    return env;
}

HybridConfig hybrid_from_json(const json& j) {
    reject_unknown(
        j, {"fusion", "sigma_init", "alpha", "lambda", "clip_eps", "ent_coef", "kl_coef"},
        "hybrid.");
    HybridConfig hybrid;
    if (j.contains("fusion")) {
        hybrid.fusion = fusion_from_name(j.at("fusion").get<std::string>());
    }
    if (j.contains("sigma_init")) {
        const auto& pair = j.at("sigma_init");
        if (!pair.is_array() || pair.size() != 2) {
            throw ConfigError("hybrid.sigma_init must be a [sigma_pg, sigma_sft] pair");
        }
        hybrid.sigma_init_pg = pair.at(0).get<double>();
        hybrid.sigma_init_sft = pair.at(1).get<double>();
    }
    read(j, "alpha", hybrid.alpha);
    read(j, "lambda", hybrid.lambda);
    read(j, "clip_eps", hybrid.clip_eps);
    read(j, "ent_coef", hybrid.ent_coef);
    read(j, "kl_coef", hybrid.kl_coef);
    return hybrid;
}

}  // namespace

CliConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config JSON: ") + e.what());
    }
    reject_unknown(j,
                   {"env", "algo", "regime", "hybrid", "batch_size", "group_size", "steps",
                    "eval_every", "lr", "seed", "n_train", "n_test", "hidden", "out_dir"},
                   "");
    CliConfig config;
    try {
        if (j.contains("env")) config.train.env = env_from_json(j.at("env"));
        if (j.contains("hybrid")) config.train.hybrid = hybrid_from_json(j.at("hybrid"));
        if (j.contains("algo")) {
            config.train.algo = algo_from_name(j.at("algo").get<std::string>());
        }
        if (j.contains("regime")) {
            config.train.regime = regime_from_name(j.at("regime").get<std::string>());
        }
        read(j, "batch_size", config.train.batch_size);
        read(j, "group_size", config.train.group_size);
        read(j, "steps", config.train.steps);
        read(j, "eval_every", config.train.eval_every);
        read(j, "lr", config.train.lr);
        read(j, "seed", config.train.seed);
        read(j, "n_train", config.train.n_train);
        read(j, "n_test", config.train.n_test);
        read(j, "hidden", config.train.hidden);
        read(j, "out_dir", config.out_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
    config.train.validate();
    return config;
}

CliConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json_text(text);
}

std::string config_to_json_text(const CliConfig& config) {
    const TrainConfig& t = config.train;
    json j{
        {"env",
         {{"kind", env_kind_name(t.env.kind)},
          {"vocab_size", t.env.vocab_size},
          {"answer_len", t.env.answer_len},
          {"prompt_space", t.env.prompt_space},
          {"demo_fraction", t.env.demo_fraction}}},
        {"algo", algo_name(t.algo)},
        {"regime", regime_name(t.regime)},
        {"hybrid",
         {{"fusion", fusion_name(t.hybrid.fusion)},
          {"sigma_init", {t.hybrid.sigma_init_pg, t.hybrid.sigma_init_sft}},
          {"alpha", t.hybrid.alpha},
          {"lambda", t.hybrid.lambda},
          {"clip_eps", t.hybrid.clip_eps},
          {"ent_coef", t.hybrid.ent_coef},
          {"kl_coef", t.hybrid.kl_coef}}},
        {"batch_size", t.batch_size},
        {"group_size", t.group_size},
        {"steps", t.steps},
        {"eval_every", t.eval_every},
        {"lr", t.lr},
        {"seed", t.seed},
        {"n_train", t.n_train},
        {"n_test", t.n_test},
        {"hidden", t.hidden},
        {"out_dir", config.out_dir},
    };
    return j.dump(2);
}

}  // namespace superrl
