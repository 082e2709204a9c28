#pragma once

#include <cstdint>
#include <vector>

namespace tfa {

/// Deterministic counter-based random stream. Output i depends only on
/// (seed, i), so identical seeds and call sequences give identical results
/// on every platform. split() derives an independent child stream; the
/// parent's future draws are a function of its own counter only.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller; second value of each pair is cached.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    Rng split();

    /// k distinct indices from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace tfa
