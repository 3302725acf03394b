#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace spectrack {

/// Deterministic random stream. Gaussian draws use Box-Muller on top of the
/// raw mt19937_64 output so sequences do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed), seed_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal draw.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t integer(std::uint64_t bound) {
        // rejection sampling, avoids modulo bias
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t draw = gen_();
        while (draw >= limit) {
            draw = gen_();
        }
        return draw % bound;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Seed for an independent stream derived from a root seed and a stream id.
    static std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
        // splitmix64 finalizer over the combined value
        std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Independent stream keyed by the root seed of this generator.
    Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace spectrack
