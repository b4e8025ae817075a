#pragma once

#include <cmath>
#include <cstdint>

namespace bmi {

// Seedable counter-free PRNG (splitmix64). All randomness in the pipeline
// flows through this generator so runs are reproducible across platforms;
// std::<distribution> output is implementation-defined and is not used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive integer range; rejection-free modulo bias is irrelevant at
    // the range sizes used here (seconds within a day).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next() % span);
    }

    // Standard normal via Box-Muller; draws two uniforms per call.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Knuth's product method; switches to a rounded normal approximation for
    // large means where the product underflows.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda > 60.0) {
            double d = std::round(lambda + std::sqrt(lambda) * normal());
            return d < 0.0 ? 0 : static_cast<int>(d);
        }
        const double limit = std::exp(-lambda);
        double prod = 1.0;
        int k = 0;
        while (true) {
            prod *= uniform();
            if (prod <= limit) return k;
            ++k;
        }
    }

private:
    std::uint64_t state_;
};

// Deterministic seed derivation for independent substreams.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace bmi
