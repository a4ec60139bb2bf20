#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace invreg {

// Seedable 64-bit generator (splitmix64). All randomness in the library is
// drawn from this generator so that results are reproducible across
// platforms and standard-library versions.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [-1,1).
    double next_symmetric() { return 2.0 * next_double() - 1.0; }

    // Standard normal via Box-Muller on splitmix uniforms.
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 1e-300) u1 = next_double();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    std::vector<double> symmetric_vector(std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = next_symmetric();
        return v;
    }

private:
    std::uint64_t state_;
};

// Derives a per-item stream from a master seed, used by the experiment
// harness so work items are order-independent.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t item) {
    SplitMix64 g(master ^ (0x9e3779b97f4a7c15ULL * (item + 1)));
    return g.next_u64();
}

}  // namespace invreg
