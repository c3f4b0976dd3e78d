#ifndef BINNET_RNG_HPP
#define BINNET_RNG_HPP

#include <cstdint>

namespace binnet {

// splitmix64 (Steele et al.). Fixed here as the project-wide PRNG so shuffles,
// builder presets and synthetic fixtures reproduce bit-exactly everywhere.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

    bool next_bool() { return (next() & 1u) != 0; }
};

} // namespace binnet

#endif
