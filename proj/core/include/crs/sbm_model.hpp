#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crs/error.hpp"
#include "crs/random.hpp"

namespace crs {

/// Dense row-major square matrix; m is tiny (a handful of blocks).
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t m, double fill = 0.0) : m_(m), data_(m * m, fill) {}
    SquareMatrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t size() const noexcept { return m_; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * m_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * m_ + c]; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const SquareMatrix&) const = default;

private:
    std::size_t m_ = 0;
    std::vector<double> data_;
};

/// Stochastic block model SBM(N, pi, lambda/N) together with the referral
/// parameters (coupon cap, seed fraction).
struct SbmParams {
    std::int64_t n_population = 0;
    std::vector<double> pi;
    SquareMatrix lambda;
    int coupon_cap = 1;
    double seed_fraction = 0.0;

    std::size_t n_blocks() const noexcept { return pi.size(); }
    double edge_probability(std::size_t k, std::size_t l) const {
        return lambda(k, l) / static_cast<double>(n_population);
    }
    std::int64_t seed_count() const;
};

struct ParamViolation {
    ErrorCode code;
    std::string message;
};

/// Every violated constraint, empty when the parameters are usable.
std::vector<ParamViolation> check_params(const SbmParams& p);

/// Returns `p` unchanged when valid; otherwise throws an Error whose message
/// lists every violation (code of the first one).
const SbmParams& validate_params(const SbmParams& p);

struct BlockSizes {
    std::vector<std::int64_t> sizes;

    std::int64_t total() const;
    std::int64_t operator[](std::size_t l) const { return sizes[l]; }
    std::size_t size() const noexcept { return sizes.size(); }
    bool operator==(const BlockSizes&) const = default;
};

struct OffspringMatrix {
    SquareMatrix mu;
    double perron_root = 0.0;
    bool irreducible = false;
    bool supercritical = false;
};

/// mu_lk = lambda_lk * pi_k, strong connectivity of its support and the
/// Perron root by shifted power iteration.
OffspringMatrix offspring_check(const SbmParams& p);

/// Strong connectivity of the directed graph {(r, c) : M(r, c) > 0}.
bool is_irreducible(const SquareMatrix& m);

/// Perron root of a nonnegative matrix. Throws PowerIterationDiverged when the
/// relative change does not drop below `tol` within `max_iter` iterations.
double perron_root(const SquareMatrix& m, double tol = 1e-10, int max_iter = 100000);

BlockSizes sample_block_sizes(const SbmParams& p, Rng& rng);

/// Explicit undirected simple graph with block labels. Adjacency is kept as
/// sorted neighbour lists.
struct Graph {
    std::vector<std::uint32_t> block_of;
    std::vector<std::vector<std::uint32_t>> adjacency;

    std::size_t vertex_count() const noexcept { return block_of.size(); }
    std::size_t edge_count() const;
    bool has_edge(std::uint32_t i, std::uint32_t j) const;
};

inline constexpr std::int64_t kDefaultGraphCap = 5000;

/// Vertices are labelled block by block: block 0 occupies [0, N_0), etc.
Graph sample_adjacency(const SbmParams& p, const BlockSizes& sizes, Rng& rng,
                       std::int64_t max_vertices = kDefaultGraphCap);

}  // namespace crs
