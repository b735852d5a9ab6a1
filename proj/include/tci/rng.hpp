#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace tci {

/// Deterministic 64-bit generator (splitmix64). All randomized searches in
/// the library take one of these explicitly; results are reproducible from
/// the seed alone, independent of platform and standard-library version.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Derive an independent substream, e.g. one per pipeline phase.
    Rng fork(std::uint64_t tag) {
        return Rng(next_u64() ^ (0x9e3779b97f4a7c15ull * (tag + 1)));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    /// Standard normal via Box-Muller (no cached spare, keeps state simple).
    double gaussian() {
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Uniform direction on the sphere S^{dim-1}, dim <= 3.
    std::array<double, 3> sphere_dir(int dim) {
        std::array<double, 3> v{0.0, 0.0, 0.0};
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (int i = 0; i < dim; ++i) {
                v[i] = gaussian();
                norm2 += v[i] * v[i];
            }
        } while (norm2 < 1e-12);
        double inv = 1.0 / std::sqrt(norm2);
        for (int i = 0; i < dim; ++i) v[i] *= inv;
        return v;
    }

private:
    std::uint64_t state_;
};

} // namespace tci
