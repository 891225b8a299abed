#pragma once

#include <cstdint>
#include <random>

namespace vcrown {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Portable pseudo-random stream: std::mt19937_64 (bit-exact across standard
/// libraries) seeded through SplitMix64. Uniforms take the top 53 bits;
/// normals use the Box-Muller transform, so no distribution object with
/// implementation-defined output is involved.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    /// Independent stream for a (seed, a, b) triple, e.g. (seed, K, trial).
    static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
    {
        return Rng(splitmix64(splitmix64(seed) ^ splitmix64(a + 0x632BE59BD9B4E019ULL)) ^
                   splitmix64(b + 0x85157AF5ULL));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal();

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * n) % n; }

private:
    std::mt19937_64 engine_;
};

} // namespace vcrown
