#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace nsr {

/// Seeded generator used everywhere in the project.
///
/// Raw bits come from std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. All derived distributions are implemented here rather than
/// taken from <random>, because the standard leaves their algorithms to the
/// library vendor.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Unbiased (rejection on the top range).
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal();

    /// Poisson variate. Knuth multiplication below mean 30, PTRS above.
    std::uint64_t poisson(double mean);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer over (seed, stream): independent child seeds for
/// per-item generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace nsr
