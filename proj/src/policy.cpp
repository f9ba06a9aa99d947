#include "superrl/policy.hpp"

#include <fstream>

#include "json.hpp"
#include "superrl/distributions.hpp"
#include "superrl/errors.hpp"

namespace superrl {

std::vector<double> Featurizer::features(std::span<const Token> prompt_tokens, int position,
                                         Token prev) const {
    if (prompt_tokens.size() != static_cast<std::size_t>(prompt_width)) {
        throw ShapeError("features: prompt token width mismatch");
    }
    if (position < 0 || position >= max_positions) {
        throw DomainError("features: position beyond length cap");
    }
    if (prev < 0 || prev > bos_index()) {
        throw DomainError("features: previous token out of range");
    }
    std::vector<double> x(static_cast<std::size_t>(input_dim()), 0.0);
    for (int j = 0; j < prompt_width; ++j) {
        const Token t = prompt_tokens[static_cast<std::size_t>(j)];
        if (t < 0 || t >= vocab_size) {
            throw DomainError("features: prompt token out of vocabulary");
        }
        x[static_cast<std::size_t>(j * vocab_size + t)] = 1.0;
    }
    const int base = prompt_width * vocab_size;
    x[static_cast<std::size_t>(base + position)] = 1.0;
    x[static_cast<std::size_t>(base + max_positions + prev)] = 1.0;
    return x;
}

PolicyParams PolicyParams::init(const EnvConfig& env, int hidden, double init_scale, Rng rng) {
    env.validate();
    PolicyParams p;
    p.feat = Featurizer{prompt_token_width(env.vocab_size, env.prompt_space),
                        env.length_cap(), env.vocab_size};
    const auto in = static_cast<std::size_t>(p.feat.input_dim());
    const auto h = static_cast<std::size_t>(hidden);
    Rng actor_rng = rng.split(0);
    Rng value_rng = rng.split(1);
    p.net = MlpParams::random_init(in, h, static_cast<std::size_t>(env.vocab_size),
                                   init_scale, actor_rng);
    p.value_net = MlpParams::random_init(in, h, 1, init_scale, value_rng);
    // critic shares the actor's first-layer initialization
    p.value_net.w1 = p.net.w1;
    p.value_net.b1 = p.net.b1;
    return p;
}

double ReferencePolicy::logprob(const TaskInstance& instance, int position, Token prev,
                                Token token) const {
    const std::vector<double> x = feat_.features(instance.prompt_tokens, position, prev);
    const std::vector<double> lp = log_softmax(mlp_forward(net_, x));
    if (token < 0 || token >= static_cast<Token>(lp.size())) {
        throw DomainError("ReferencePolicy::logprob: token out of vocabulary");
    }
    return lp[static_cast<std::size_t>(token)];
}

ReferencePolicy snapshot_reference(const PolicyParams& params) {
    return ReferencePolicy(params.feat, params.net);
}

SequenceScore sequence_logprob(const PolicyParams& params, const TaskInstance& instance,
                               const TokenSeq& tokens) {
    SequenceScore score;
    score.per_step.reserve(tokens.size());
    score.caches.reserve(tokens.size());
    score.log_dists.reserve(tokens.size());
    Token prev = params.feat.bos_index();
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const Token y = tokens[t];
        if (y < 0 || y >= params.feat.vocab_size) {
            throw DomainError("sequence_logprob: token out of vocabulary");
        }
        const std::vector<double> x =
            params.feat.features(instance.prompt_tokens, static_cast<int>(t), prev);
        MlpCache cache;
        std::vector<double> lp = log_softmax(mlp_forward(params.net, x, &cache));
        score.per_step.push_back(lp[static_cast<std::size_t>(y)]);
        score.total += lp[static_cast<std::size_t>(y)];
        score.caches.push_back(std::move(cache));
        score.log_dists.push_back(std::move(lp));
        prev = y;
    }
    return score;
}

namespace {

Trajectory sample_one(const PolicyParams& params, const ReferencePolicy& ref,
                      const TaskInstance& instance, int horizon, Rng rng, int group_id) {
    Trajectory traj;
    traj.prompt_id = instance.prompt_id;
    traj.instance = &instance;
    traj.group_id = group_id;
    Token prev = params.feat.bos_index();
    for (int t = 0; t < horizon; ++t) {
        const std::vector<double> x = params.feat.features(instance.prompt_tokens, t, prev);
        const std::vector<double> lp = log_softmax(mlp_forward(params.net, x));
        const Token y = sample_categorical(lp, rng);
        traj.tokens.push_back(y);
        traj.logprobs.push_back(lp[static_cast<std::size_t>(y)]);
        traj.ref_logprobs.push_back(ref.logprob(instance, t, prev, y));
        prev = y;
    }
    traj.rewards.assign(traj.tokens.size(), 0.0);
    return traj;
}

}  // namespace

std::vector<Trajectory> sample_group(const PolicyParams& params, const ReferencePolicy& ref,
                                     const TaskInstance& instance, int G, Rng rng,
                                     int group_id) {
    if (G < 1) {
        throw ConfigError("sample_group: G must be >= 1");
    }
    const int horizon = static_cast<int>(instance.oracle_trace.size());
    if (horizon > params.feat.max_positions) {
        throw ShapeError("sample_group: trace exceeds the policy's length cap");
    }
    std::vector<Trajectory> group;
    group.reserve(static_cast<std::size_t>(G));
    for (int g = 0; g < G; ++g) {
        group.push_back(sample_one(params, ref, instance, horizon,
                                   rng.split(static_cast<std::uint64_t>(g)), group_id));
    }
    return group;
}

TokenSeq greedy_decode(const PolicyParams& params, const TaskInstance& instance) {
    const int horizon = static_cast<int>(instance.oracle_trace.size());
    TokenSeq tokens;
    Token prev = params.feat.bos_index();
    for (int t = 0; t < horizon; ++t) {
        const std::vector<double> x = params.feat.features(instance.prompt_tokens, t, prev);
        const std::vector<double> logits = mlp_forward(params.net, x);
        std::size_t best = 0;
        for (std::size_t i = 1; i < logits.size(); ++i) {
            if (logits[i] > logits[best]) best = i;
        }
        tokens.push_back(static_cast<Token>(best));
        prev = static_cast<Token>(best);
    }
    return tokens;
}

double value_estimate(const PolicyParams& params, const TaskInstance& instance, int step,
                      Token prev) {
    if (prev < 0) {
        prev = params.feat.bos_index();
    }
    const std::vector<double> x = params.feat.features(instance.prompt_tokens, step, prev);
    return mlp_forward(params.value_net, x)[0];
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < m.cols; ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.size(), j.empty() ? 0 : j.at(0).size());
    for (std::size_t i = 0; i < m.rows; ++i) {
        const auto& row = j.at(i);
        if (row.size() != m.cols) {
            throw ShapeError("checkpoint: ragged matrix rows");
        }
        for (std::size_t jj = 0; jj < m.cols; ++jj) {
            m(i, jj) = row.at(jj).get<double>();
        }
    }
    return m;
}

}  // namespace

void save_checkpoint(const PolicyParams& params, const std::string& path) {
    nlohmann::json j{
        {"net.w1", matrix_to_json(params.net.w1)},
        {"net.b1", params.net.b1},
        {"net.w2", matrix_to_json(params.net.w2)},
        {"net.b2", params.net.b2},
        {"value.w1", matrix_to_json(params.value_net.w1)},
        {"value.b1", params.value_net.b1},
        {"value.w2", matrix_to_json(params.value_net.w2)},
        {"value.b2", params.value_net.b2},
        {"sigma_pg", params.sigma_pg},
        {"sigma_sft", params.sigma_sft},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write checkpoint: " + path);
    }
    out << j.dump(2) << "\n";
}

PolicyParams load_checkpoint(const std::string& path, const Featurizer& expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read checkpoint: " + path);
    }
    nlohmann::json j;
    in >> j;
    PolicyParams p;
    p.feat = expected;
    p.net.w1 = matrix_from_json(j.at("net.w1"));
    p.net.b1 = j.at("net.b1").get<std::vector<double>>();
    p.net.w2 = matrix_from_json(j.at("net.w2"));
    p.net.b2 = j.at("net.b2").get<std::vector<double>>();
    p.value_net.w1 = matrix_from_json(j.at("value.w1"));
    p.value_net.b1 = j.at("value.b1").get<std::vector<double>>();
    p.value_net.w2 = matrix_from_json(j.at("value.w2"));
    p.value_net.b2 = j.at("value.b2").get<std::vector<double>>();
    p.sigma_pg = j.at("sigma_pg").get<double>();
    p.sigma_sft = j.at("sigma_sft").get<double>();
    if (p.net.input_dim() != static_cast<std::size_t>(expected.input_dim())) {
        throw ShapeError("checkpoint does not match the expected featurization");
    }
    return p;
}

}  // namespace superrl
