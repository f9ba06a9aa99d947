#include "superrl/rng.hpp"

#include <cmath>

#include "superrl/errors.hpp"

namespace superrl {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    return mix(state_);
}

double Rng::uniform() {
    // 53 high bits -> [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    // guard the log against u1 == 0
    if (u1 <= 0.0) {
        u1 = 0x1.0p-53;
    }
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    if (n == 0) {
        throw DomainError("uniform_index: n must be positive");
    }
    // multiply-shift; bias is O(n / 2^64), negligible at this scale
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

Rng Rng::split(std::uint64_t child_id) const {
    // two mixing rounds so that consecutive child ids land far apart
    return Rng(mix(mix(state_ + kGolden * (child_id + 1)) ^ kGolden));
}

}  // namespace superrl
