#include "superrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "superrl/errors.hpp"

namespace superrl {

std::string env_kind_name(EnvKind kind) {
    return kind == EnvKind::DenseChain ? "DenseChain" : "SparseLock";
}

EnvKind env_kind_from_name(const std::string& name) {
    if (name == "DenseChain") return EnvKind::DenseChain;
    if (name == "SparseLock") return EnvKind::SparseLock;
    throw ConfigError("unknown env kind: " + name);
}

void EnvConfig::validate() const {
    if (vocab_size < 2) throw ConfigError("vocab_size must be >= 2");
    if (answer_len < 1) throw ConfigError("answer_len must be >= 1");
    if (prompt_space < 1) throw ConfigError("prompt_space must be >= 1");
    if (demo_fraction < 0.0 || demo_fraction > 1.0) {
        throw ConfigError("demo_fraction must lie in [0, 1]");
    }
}

TokenSeq Canonicalizer::apply(const TokenSeq& tokens) const {
    TokenSeq out = tokens;
    if (!equivalences.empty()) {
        for (Token& t : out) {
            // follow mappings to a fixpoint so double application is a no-op
            bool moved = true;
            int guard = 0;
            while (moved && guard++ < 64) {
                moved = false;
                for (const auto& [from, to] : equivalences) {
                    if (t == from && from != to) {
                        t = to;
                        moved = true;
                    }
                }
            }
        }
    }
    if (strip_leading_zeros) {
        std::size_t first = 0;
        while (first + 1 < out.size() && out[first] == 0) {
            ++first;
        }
        out.erase(out.begin(), out.begin() + first);
    }
    return out;
}

TokenSeq canonicalize(const TokenSeq& tokens) { return Canonicalizer{}.apply(tokens); }

int prompt_token_width(int vocab_size, int prompt_space) {
    int width = 1;
    long long range = vocab_size;
    while (range < prompt_space) {
        range *= vocab_size;
        ++width;
    }
    return width;
}

namespace {

TokenSeq encode_prompt(int prompt_id, int vocab_size, int prompt_space) {
    const int width = prompt_token_width(vocab_size, prompt_space);
    TokenSeq tokens(width, 0);
    int v = prompt_id;
    for (int i = width - 1; i >= 0; --i) {
        tokens[i] = v % vocab_size;
        v /= vocab_size;
    }
    return tokens;
}

}  // namespace

Dataset make_dataset(const EnvConfig& config, int n_train, int n_test, Rng rng) {
    config.validate();
    if (n_train < 1 || n_test < 1) {
        throw ConfigError("make_dataset: n_train and n_test must be >= 1");
    }
    if (n_train + n_test > config.prompt_space) {
        throw ConfigError("make_dataset: prompt_space too small for disjoint train/test");
    }

    Dataset ds;
    ds.config = config;

    // disjoint train/test prompt ids via a partial Fisher-Yates shuffle
    std::vector<int> ids(static_cast<std::size_t>(config.prompt_space));
    std::iota(ids.begin(), ids.end(), 0);
    Rng id_rng = rng.split(1);
    const int needed = n_train + n_test;
    for (int i = 0; i < needed; ++i) {
        const auto j = i + id_rng.uniform_index(ids.size() - i);
        std::swap(ids[i], ids[j]);
    }

    // DenseChain: one shared oracle chain per dataset; per-token feedback
    // makes it directly learnable from rollouts. SparseLock: the trace echoes
    // the prompt tokens cyclically, so each prompt hides its own combination
    // while the echo rule itself transfers to held-out prompts.
    TokenSeq chain(static_cast<std::size_t>(config.trace_len()));
    Rng chain_rng = rng.split(0);
    for (Token& t : chain) {
        t = static_cast<Token>(chain_rng.uniform_index(config.vocab_size));
    }
    auto make_instance = [&](int id) {
        TaskInstance inst;
        inst.prompt_id = id;
        inst.prompt_tokens = encode_prompt(id, config.vocab_size, config.prompt_space);
        if (config.kind == EnvKind::DenseChain) {
            inst.oracle_trace = chain;
        } else {
            const std::size_t width = inst.prompt_tokens.size();
            inst.oracle_trace.resize(static_cast<std::size_t>(config.trace_len()));
            for (std::size_t t = 0; t < inst.oracle_trace.size(); ++t) {
                inst.oracle_trace[t] = inst.prompt_tokens[t % width];
            }
        }
        inst.gold_answer.assign(inst.oracle_trace.end() - config.answer_len,
                                inst.oracle_trace.end());
        return inst;
    };
    for (int i = 0; i < n_train; ++i) ds.train.push_back(make_instance(ids[i]));
    for (int i = 0; i < n_test; ++i) ds.test.push_back(make_instance(ids[n_train + i]));

    // demos cover ceil(rho * n_train) training prompts, each verified reward-1.
    // selection is curated greedily for (slot, token) coverage so a small
    // corpus still exposes the whole echo rule; ties and the remainder follow
    // a seeded shuffle
    const int n_demos = static_cast<int>(std::ceil(config.demo_fraction * n_train));
    std::vector<int> order(static_cast<std::size_t>(n_train));
    std::iota(order.begin(), order.end(), 0);
    Rng demo_rng = rng.split(2);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const auto j = i + demo_rng.uniform_index(order.size() - i);
        std::swap(order[i], order[j]);
    }
    const std::size_t width = ds.train.empty() ? 0 : ds.train[0].prompt_tokens.size();
    std::vector<char> covered(width * static_cast<std::size_t>(config.vocab_size), 0);
    std::vector<char> used(static_cast<std::size_t>(n_train), 0);
    std::vector<int> chosen;
    while (static_cast<int>(chosen.size()) < n_demos) {
        int best = -1;
        int best_gain = -1;
        for (int idx : order) {
            if (used[static_cast<std::size_t>(idx)]) continue;
            const TokenSeq& pt = ds.train[static_cast<std::size_t>(idx)].prompt_tokens;
            int gain = 0;
            for (std::size_t j = 0; j < width; ++j) {
                if (!covered[j * config.vocab_size + static_cast<std::size_t>(pt[j])]) ++gain;
            }
            if (gain > best_gain) {
                best_gain = gain;
                best = idx;
            }
        }
        used[static_cast<std::size_t>(best)] = 1;
        const TokenSeq& pt = ds.train[static_cast<std::size_t>(best)].prompt_tokens;
        for (std::size_t j = 0; j < width; ++j) {
            covered[j * config.vocab_size + static_cast<std::size_t>(pt[j])] = 1;
        }
        chosen.push_back(best);
    }
    for (int idx : chosen) {
        const TaskInstance& inst = ds.train[static_cast<std::size_t>(idx)];
        if (reward_total(inst.oracle_trace, inst, config, ds.canon) != 1.0) {
            throw NumericError("make_dataset: demo failed reward-1 verification");
        }
        ds.demos.entries.push_back({inst.prompt_id, inst.oracle_trace});
    }
    std::sort(ds.demos.entries.begin(), ds.demos.entries.end(),
              [](const DemoEntry& a, const DemoEntry& b) { return a.prompt_id < b.prompt_id; });
    return ds;
}

double sparse_reward(const TokenSeq& response, const TaskInstance& instance,
                     const Canonicalizer& canon) {
    const std::size_t n = static_cast<std::size_t>(instance.gold_answer.size());
    TokenSeq extracted = response.size() > n
                             ? TokenSeq(response.end() - n, response.end())
                             : response;
    return canon.apply(extracted) == canon.apply(instance.gold_answer) ? 1.0 : 0.0;
}

std::vector<double> dense_reward(const TokenSeq& response, const TaskInstance& instance) {
    const std::size_t t_len = instance.oracle_trace.size();
    std::vector<double> rewards(response.size(), 0.0);
    const double unit = t_len > 0 ? 1.0 / static_cast<double>(t_len) : 0.0;
    const std::size_t upto = std::min(response.size(), t_len);
    for (std::size_t t = 0; t < upto; ++t) {
        if (response[t] == instance.oracle_trace[t]) {
            rewards[t] = unit;
        }
    }
    return rewards;
}

double reward_total(const TokenSeq& response, const TaskInstance& instance,
                    const EnvConfig& config, const Canonicalizer& canon) {
    if (config.kind == EnvKind::SparseLock) {
        return sparse_reward(response, instance, canon);
    }
    // matches / T rather than summing T rounded terms, so a full match is
    // exactly 1
    const std::size_t t_len = instance.oracle_trace.size();
    std::size_t matches = 0;
    for (std::size_t t = 0; t < std::min(response.size(), t_len); ++t) {
        if (response[t] == instance.oracle_trace[t]) {
            ++matches;
        }
    }
    return t_len > 0 ? static_cast<double>(matches) / static_cast<double>(t_len) : 0.0;
}

namespace {

nlohmann::json instance_to_json(const TaskInstance& inst) {
    return nlohmann::json{{"prompt_id", inst.prompt_id},
                          {"prompt", inst.prompt_tokens},
                          {"gold", inst.gold_answer},
                          {"trace", inst.oracle_trace}};
}

TaskInstance instance_from_json(const nlohmann::json& j) {
    TaskInstance inst;
    inst.prompt_id = j.at("prompt_id").get<int>();
    inst.prompt_tokens = j.at("prompt").get<TokenSeq>();
    inst.gold_answer = j.at("gold").get<TokenSeq>();
    inst.oracle_trace = j.at("trace").get<TokenSeq>();
    return inst;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot open for writing: " + path);
    }
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open for reading: " + path);
    }
    return in;
}

}  // namespace

void save_instances_jsonl(const std::string& path, const std::vector<TaskInstance>& instances) {
    std::ofstream out = open_out(path);
    for (const TaskInstance& inst : instances) {
        out << instance_to_json(inst).dump() << "\n";
    }
}

std::vector<TaskInstance> load_instances_jsonl(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<TaskInstance> instances;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        instances.push_back(instance_from_json(nlohmann::json::parse(line)));
    }
    return instances;
}

void save_demos_jsonl(const std::string& path, const DemoSet& demos) {
    std::ofstream out = open_out(path);
    for (const DemoEntry& entry : demos.entries) {
        out << nlohmann::json{{"prompt_id", entry.prompt_id}, {"tokens", entry.tokens}}.dump()
            << "\n";
    }
}

DemoSet load_demos_jsonl(const std::string& path) {
    std::ifstream in = open_in(path);
    DemoSet demos;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        demos.entries.push_back({j.at("prompt_id").get<int>(), j.at("tokens").get<TokenSeq>()});
    }
    return demos;
}

}  // namespace superrl
