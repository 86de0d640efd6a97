#pragma once
#include <cstdint>

namespace aggsim::rng {

// Counter-based generator: every uniform is a pure hash of
// (seed, particle id, counter), so draws are independent of execution order
// and thread count — the requirement behind the serial == parallel
// determinism contract. The particle id and counter are packed injectively
// (ids < 2^26, counters < 2^38) and pushed through a 64-bit finalizer with
// full avalanche (the SplitMix64 output permutation).

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

// Pre-mixed seed, hoisted out of hot loops.
inline constexpr std::uint64_t seed_key(std::uint64_t seed) {
    return mix64(seed ^ 0x6A09E667F3BCC909ull);
}

inline constexpr std::uint64_t bits(std::uint64_t seed_key, std::uint64_t particle,
                                    std::uint64_t counter) {
    return mix64(seed_key ^ ((counter << 26) + particle));
}

// Uniform in [0, 1): top 53 bits of the hash.
inline constexpr double u01(std::uint64_t seed_key, std::uint64_t particle,
                            std::uint64_t counter) {
    return static_cast<double>(bits(seed_key, particle, counter) >> 11) * 0x1.0p-53;
}

// Counter-space layout: per-step draws use counter = step * 4 + stream so the
// init-time streams (step 0) and the per-step tumbling stream never collide.
enum Stream : std::uint64_t {
    stream_init_pos = 0,
    stream_init_vel = 1,
    stream_tumble = 2,
};

inline constexpr std::uint64_t step_counter(std::uint64_t step, Stream s) {
    return step * 4 + s;
}

} // namespace aggsim::rng
