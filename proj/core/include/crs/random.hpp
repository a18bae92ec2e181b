#pragma once

// Exact discrete samplers on top of a 64-bit Mersenne Twister.
//
// Everything here is written against the raw engine output (not the
// <random> distributions) so that a given seed produces the same stream on
// every standard library.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace crs {

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    /// Independent stream for replicate `index` of an ensemble seeded by `master`.
    static Rng stream(std::uint64_t master, std::uint64_t index);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1).
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    /// Uniform integer in [0, bound); bound > 0. Rejection, no modulo bias.
    std::uint64_t below(std::uint64_t bound);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return engine_(); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Bin(n, p). Inversion when n*min(p,1-p) < 10, BTRD otherwise.
std::int64_t sample_binomial(Rng& rng, std::int64_t n, double p);

/// Multinomial(n; probs) by sequential conditional binomials.
/// `probs` need not be normalised exactly; the last cell takes the remainder.
std::vector<std::int64_t> sample_multinomial(Rng& rng, std::int64_t n,
                                             std::span<const double> probs);

/// Number of marked balls among `draws` taken without replacement from an urn
/// of `total` balls, `marked` of which are marked.
std::int64_t sample_hypergeometric(Rng& rng, std::int64_t draws, std::int64_t marked,
                                   std::int64_t total);

/// Multivariate hypergeometric: `draws` balls without replacement from an
/// urn holding counts[l] balls of colour l. Requires draws <= sum(counts).
std::vector<std::int64_t> sample_multivariate_hypergeometric(Rng& rng, std::int64_t draws,
                                                             std::span<const std::int64_t> counts);

/// Index l with probability weights[l] / sum(weights). Requires sum > 0.
std::size_t sample_weighted_index(Rng& rng, std::span<const std::int64_t> weights);

}  // namespace crs
