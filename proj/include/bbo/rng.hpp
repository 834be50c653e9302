#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace bbo {

/// Deterministic random stream (xoshiro256++ seeded via splitmix64).
///
/// The standard library distributions are implementation-defined, so every
/// draw here is produced with explicit arithmetic. Two builds of the harness
/// on any platform produce bit-identical streams from the same seed, which is
/// what makes record/replay and the end-to-end determinism contract possible.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi);

    /// Standard normal draw (Box-Muller, two uniforms per call, no cache).
    double normal();

    /// Vector of standard normal draws.
    std::vector<double> normal_vector(int n);

private:
    std::uint64_t state_[4];
};

/// FNV-1a 64-bit hash of a byte string.
std::uint64_t stable_hash(std::string_view bytes);

/// Order-dependent combination of two 64-bit values.
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

} // namespace bbo
