#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace opensis {

// SplitMix64 finalizer, used to spread (base_seed, index) pairs over seed space.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Deterministic random stream. mt19937_64 supplies the bits; every variate
// transform is implemented here rather than with std::*_distribution, which
// are free to differ between standard libraries and would break bitwise
// reproducibility of simulations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform on [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Exp(rate); log1p keeps precision for u near 0
    double exponential(double rate) {
        if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
        return -std::log1p(-uniform01()) / rate;
    }

    // uniform on {0, ..., n-1}, unbiased via rejection
    int uniform_index(int n) {
        if (n < 1) throw std::invalid_argument("uniform_index needs n >= 1");
        const std::uint64_t nn = static_cast<std::uint64_t>(n);
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t overhang = (max % nn + 1u) % nn; // 2^64 mod n
        for (;;) {
            const std::uint64_t x = next_u64();
            if (overhang == 0 || x <= max - overhang)
                return static_cast<int>(x % nn);
        }
    }

    // standard normal, Box-Muller (cosine branch)
    double normal01() {
        const double u1 = 1.0 - uniform01(); // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 engine_;
};

inline std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t index) {
    return splitmix64(base_seed + 0x9E3779B97F4A7C15ull * (index + 1));
}

// Stream for realization `index` of an ensemble rooted at `base_seed`.
// Distinct indices give statistically independent streams; the same pair
// always gives the same stream.
inline RandomStream seed_stream(std::uint64_t base_seed, std::uint64_t index) {
    return RandomStream(derive_stream_seed(base_seed, index));
}

} // namespace opensis
