#pragma once

#include <cstdint>

namespace superrl {

/// Deterministic splittable random stream built on the splitmix64 mixer.
///
/// Same seed => bit-identical draw sequence. Parallel code never shares a
/// stream: each worker derives its own substream via split(child_id), which
/// is a pure function of (current state, child_id) and does not advance the
/// parent.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform();

    /// Standard normal via Box-Muller (two uniforms per call, no cached spare).
    double gaussian();

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Independent substream; distinct child ids give decorrelated streams.
    Rng split(std::uint64_t child_id) const;

private:
    std::uint64_t state_;
};

}  // namespace superrl
