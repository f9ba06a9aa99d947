#pragma once

#include <string>
#include <utility>
#include <vector>

#include "superrl/rng.hpp"

namespace superrl {

using Token = int;
using TokenSeq = std::vector<Token>;

/// DenseChain: per-token reward for matching the oracle trace position-wise.
/// SparseLock: binary terminal reward for reproducing the exact answer.
enum class EnvKind { DenseChain, SparseLock };

std::string env_kind_name(EnvKind kind);
EnvKind env_kind_from_name(const std::string& name);

/// Tokens of non-answer "reasoning" preceding the answer in an oracle trace.
inline constexpr int kTracePrefixLen = 2;

struct EnvConfig {
    EnvKind kind = EnvKind::SparseLock;
    int vocab_size = 8;
    int answer_len = 4;
    int prompt_space = 512;
    double demo_fraction = 0.5;

    int trace_len() const { return kTracePrefixLen + answer_len; }
    /// Upper bound on response length; also sizes the position featurization.
    int length_cap() const { return trace_len() + 2; }

    void validate() const;
    bool operator==(const EnvConfig&) const = default;
};

struct TaskInstance {
    int prompt_id = 0;
    TokenSeq prompt_tokens;
    TokenSeq gold_answer;
    TokenSeq oracle_trace;  // ends with gold_answer
};

struct DemoEntry {
    int prompt_id = 0;
    TokenSeq tokens;
};

/// Offline expert traces; every entry scores reward 1 under its env.
struct DemoSet {
    std::vector<DemoEntry> entries;
    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
};

/// Token-level answer normalization. Leading zero-tokens of the answer
/// segment are stripped, then configured token equivalences are collapsed
/// to a canonical representative. Idempotent and length-nonincreasing.
struct Canonicalizer {
    bool strip_leading_zeros = true;
    std::vector<std::pair<Token, Token>> equivalences;

    TokenSeq apply(const TokenSeq& tokens) const;
};

/// apply() with the default rule set (leading-zero stripping only).
TokenSeq canonicalize(const TokenSeq& tokens);

/// Number of base-|V| tokens used to spell a prompt id.
int prompt_token_width(int vocab_size, int prompt_space);

struct Dataset {
    EnvConfig config;
    Canonicalizer canon;
    std::vector<TaskInstance> train;
    std::vector<TaskInstance> test;
    DemoSet demos;
};

/// Builds train/test instances over disjoint prompt ids plus a demo set
/// covering ceil(demo_fraction * n_train) training prompts. The oracle trace
/// is shared across the dataset's prompts so held-out prompts remain
/// solvable; demos are verified reward-1 before inclusion. Deterministic
/// given the rng seed.
Dataset make_dataset(const EnvConfig& config, int n_train, int n_test, Rng rng);

/// Binary exact-match reward: 1 iff the canonicalized extracted answer equals
/// the canonicalized gold answer. Extraction takes the final answer_len
/// tokens, falling back to the whole response when it is shorter.
double sparse_reward(const TokenSeq& response, const TaskInstance& instance,
                     const Canonicalizer& canon = Canonicalizer{});

/// Per-step reward: step t earns 1/T if response[t] == oracle_trace[t],
/// T = trace length. The per-response total lies in [0, 1] and reaches 1
/// only for the oracle trace itself.
std::vector<double> dense_reward(const TokenSeq& response, const TaskInstance& instance);

double reward_total(const TokenSeq& response, const TaskInstance& instance,
                    const EnvConfig& config, const Canonicalizer& canon);

// line-delimited JSON persistence; records are {prompt_id, prompt, gold, trace}
void save_instances_jsonl(const std::string& path, const std::vector<TaskInstance>& instances);
std::vector<TaskInstance> load_instances_jsonl(const std::string& path);
void save_demos_jsonl(const std::string& path, const DemoSet& demos);
DemoSet load_demos_jsonl(const std::string& path);

}  // namespace superrl
