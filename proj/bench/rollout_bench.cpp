// Times the batch kernels (rollout sampling, actor gradients, evaluation)
// in serial mode against the OpenMP mode and reports the speedup. Both modes
// must agree bit-for-bit; the benchmark asserts that on the way.

#include <chrono>
#include <cstdio>
#include <string>

#include "superrl/losses.hpp"
#include "superrl/parallel.hpp"
#include "superrl/trainer.hpp"

using namespace superrl;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Workload {
    TrainConfig config;
    Dataset dataset;
    PolicyParams params;
    ReferencePolicy ref;
    std::vector<Trajectory> trajs;
    std::vector<std::vector<double>> advantages;

    explicit Workload(int batch, int group) {
        config.env.kind = EnvKind::SparseLock;
        config.batch_size = batch;
        config.group_size = group;
        config.n_train = 32;
        config.n_test = 32;
        dataset = dataset_for(config);
        params = PolicyParams::init(config.env, config.hidden, 0.05, Rng(7));
        ref = snapshot_reference(params);
    }

    void sample(int reps) {
        for (int rep = 0; rep < reps; ++rep) {
            trajs.clear();
            advantages.clear();
            std::vector<std::vector<Trajectory>> groups(
                static_cast<std::size_t>(config.batch_size));
            Rng rng = Rng(11).split(static_cast<std::uint64_t>(rep));
            for_each_index(groups.size(), [&](std::size_t i) {
                groups[i] =
                    sample_group(params, ref, dataset.train[i % dataset.train.size()],
                                 config.group_size, rng.split(i), static_cast<int>(i));
            });
            for (auto& group : groups) {
                for (Trajectory& traj : group) {
                    traj.rewards.assign(traj.tokens.size(), 0.0);
                    advantages.emplace_back(traj.tokens.size(), 0.5);
                    trajs.push_back(std::move(traj));
                }
            }
        }
    }

    double gradients(int reps) {
        double checksum = 0.0;
        for (int rep = 0; rep < reps; ++rep) {
            const ActorResult actor = ppo_objective(params, trajs, advantages, config.hybrid);
            checksum += actor.loss + actor.grad.b2[0];
        }
        return checksum;
    }
};

}  // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::stoi(argv[1]) : 20;
    Workload work(64, 5);

    struct Result {
        double sample_s = 0.0;
        double grad_s = 0.0;
        double checksum = 0.0;
    };
    auto run = [&](ExecMode mode) {
        set_exec_mode(mode);
        Result r;
        auto t0 = Clock::now();
        work.sample(reps);
        r.sample_s = seconds_since(t0);
        t0 = Clock::now();
        r.checksum = work.gradients(reps);
        r.grad_s = seconds_since(t0);
        return r;
    };

    const Result serial = run(ExecMode::Serial);
    const Result parallel = run(ExecMode::OpenMP);

    std::printf("threads: %d, reps: %d\n", max_threads(), reps);
    std::printf("%-10s %12s %12s\n", "kernel", "serial(s)", "openmp(s)");
    std::printf("%-10s %12.4f %12.4f  speedup %.2fx\n", "rollout", serial.sample_s,
                parallel.sample_s, serial.sample_s / parallel.sample_s);
    std::printf("%-10s %12.4f %12.4f  speedup %.2fx\n", "gradients", serial.grad_s,
                parallel.grad_s, serial.grad_s / parallel.grad_s);
    if (serial.checksum != parallel.checksum) {
        std::printf("MISMATCH: serial and openmp checksums differ\n");
        return 1;
    }
    std::printf("checksums match: %.17g\n", serial.checksum);
    return 0;
}
