#pragma once

#include <cstdint>

namespace smallobj {

/// SplitMix64 generator. All randomness in the toolkit flows through this
/// engine so that a run is reproducible from a single 64-bit seed, on any
/// platform and with any worker count. std:: distributions are avoided on
/// purpose: their output is implementation-defined.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [lo, hi], both ends inclusive. Requires lo <= hi.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix_bits(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Per-image stream seed. Duplicate copies of the same image must draw
/// independent transform/placement sequences, hence the copy index.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t image_id,
                                 std::uint64_t copy_index) {
    std::uint64_t h = mix_bits(global_seed + 0x9e3779b97f4a7c15ull);
    h = mix_bits(h ^ image_id);
    h = mix_bits(h ^ copy_index);
    return h;
}

}  // namespace smallobj
