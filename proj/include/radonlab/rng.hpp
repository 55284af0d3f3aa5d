#pragma once

#include <cstdint>
#include <vector>

namespace radonlab {

// Deterministic generator with a stable cross-platform stream.
// std::uniform_*_distribution is implementation-defined, so experiments
// that must reproduce byte-identical tables roll their own draws here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, bound), bound >= 1, rejection-free bias below 2^-64*bound
    std::uint64_t next_below(std::uint64_t bound) {
        return next_u64() % bound;
    }

    long long next_in(long long lo, long long hi) {  // inclusive range
        return lo + static_cast<long long>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double next_unit() {  // [0,1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_signed_unit() {  // [-1,1)
        return 2.0 * next_unit() - 1.0;
    }

    // independent stream for a sub-task (trial index, shell index, ...)
    Rng fork(std::uint64_t salt) const {
        Rng child(state_ ^ (0x6a09e667f3bcc909ull + salt * 0x3c6ef372fe94f82bull));
        child.next_u64();
        return child;
    }

private:
    std::uint64_t state_;
};

}  // namespace radonlab
