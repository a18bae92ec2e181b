#include "crs/sbm_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace crs {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonSimplexPi: return "NonSimplexPi";
        case ErrorCode::AsymmetricLambda: return "AsymmetricLambda";
        case ErrorCode::RateExceedsN: return "RateExceedsN";
        case ErrorCode::EmptySeeds: return "EmptySeeds";
        case ErrorCode::InvalidShape: return "InvalidShape";
        case ErrorCode::PowerIterationDiverged: return "PowerIterationDiverged";
        case ErrorCode::GraphTooLarge: return "GraphTooLarge";
        case ErrorCode::SeedsExceedBlock: return "SeedsExceedBlock";
        case ErrorCode::NoActiveCoupons: return "NoActiveCoupons";
        case ErrorCode::DepletedActiveMass: return "DepletedActiveMass";
        case ErrorCode::StepSizeInvalid: return "StepSizeInvalid";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

SquareMatrix::SquareMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : m_(rows.size()), data_() {
    data_.reserve(m_ * m_);
    for (const auto& row : rows) {
        if (row.size() != m_) throw Error(ErrorCode::InvalidShape, "matrix rows must have equal length");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

std::int64_t SbmParams::seed_count() const {
    // The 1e-9 slack keeps decimal fractions such as 0.29 * 100 from flooring to 28.
    return static_cast<std::int64_t>(std::floor(seed_fraction * static_cast<double>(n_population) + 1e-9));
}

std::vector<ParamViolation> check_params(const SbmParams& p) {
    std::vector<ParamViolation> out;
    const std::size_t m = p.pi.size();
    if (p.n_population <= 0) out.push_back({ErrorCode::InvalidShape, "n_population must be positive"});
    if (m == 0) out.push_back({ErrorCode::InvalidShape, "pi must have at least one block"});
    if (p.lambda.size() != m) {
        std::ostringstream os;
        os << "lambda is " << p.lambda.size() << "x" << p.lambda.size() << " but pi has " << m << " entries";
        out.push_back({ErrorCode::InvalidShape, os.str()});
        return out;
    }
    if (p.coupon_cap < 1) out.push_back({ErrorCode::InvalidShape, "coupon_cap must be >= 1"});

    double sum = 0.0;
    bool negative = false;
    for (double w : p.pi) {
        sum += w;
        negative = negative || !(w >= 0.0);
    }
    if (negative || std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "pi must be a probability vector (sum = " << sum << ")";
        out.push_back({ErrorCode::NonSimplexPi, os.str()});
    }

    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t l = k + 1; l < m; ++l) {
            if (p.lambda(k, l) != p.lambda(l, k)) {
                std::ostringstream os;
                os << "lambda(" << k + 1 << "," << l + 1 << ") = " << p.lambda(k, l) << " but lambda(" << l + 1 << ","
                   << k + 1 << ") = " << p.lambda(l, k);
                out.push_back({ErrorCode::AsymmetricLambda, os.str()});
            }
        }
    }
    bool rate_bad = false;
    for (double v : p.lambda.data()) {
        if (!(v >= 0.0) || (p.n_population > 0 && v > static_cast<double>(p.n_population))) rate_bad = true;
    }
    if (rate_bad) out.push_back({ErrorCode::RateExceedsN, "every lambda_kl must lie in [0, N]"});

    if (!(p.seed_fraction > 0.0 && p.seed_fraction <= 1.0) || p.seed_count() < 1) {
        out.push_back({ErrorCode::EmptySeeds, "floor(seed_fraction * N) must be >= 1 with seed_fraction in (0,1]"});
    }
    return out;
}

const SbmParams& validate_params(const SbmParams& p) {
    const auto violations = check_params(p);
    if (violations.empty()) return p;
    std::string msg;
    for (const auto& v : violations) {
        if (!msg.empty()) msg += "; ";
        msg += std::string(to_string(v.code)) + ": " + v.message;
    }
    throw Error(violations.front().code, msg);
}

std::int64_t BlockSizes::total() const { return std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0}); }

bool is_irreducible(const SquareMatrix& mat) {
    const std::size_t m = mat.size();
    if (m == 0) return false;
    // Strongly connected iff every vertex is reachable from 0 in the graph
    // and in its transpose.
    auto reaches_all = [&](bool transpose) {
        std::vector<char> seen(m, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t w = 0; w < m; ++w) {
                const double e = transpose ? mat(w, v) : mat(v, w);
                if (e > 0.0 && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
    };
    return reaches_all(false) && reaches_all(true);
}

double perron_root(const SquareMatrix& mat, double tol, int max_iter) {
    const std::size_t m = mat.size();
    double shift = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < m; ++c) row += mat(r, c);
        shift = std::max(shift, row);
    }
    if (shift == 0.0) return 0.0;

    // Iterate on M + sI: same eigenvectors, and the shift removes the
    // oscillation of periodic (e.g. bipartite) patterns.
    std::vector<double> x(m, 1.0 / static_cast<double>(m));
    std::vector<double> y(m);
    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t r = 0; r < m; ++r) {
            double acc = shift * x[r];
            for (std::size_t c = 0; c < m; ++c) acc += mat(r, c) * x[c];
            y[r] = acc;
        }
        const double norm = std::accumulate(y.begin(), y.end(), 0.0);
        for (std::size_t r = 0; r < m; ++r) x[r] = y[r] / norm;
        const double next = norm - shift;
        if (it > 0 && std::abs(next - estimate) <= tol * std::max(std::abs(next), 1e-300)) return std::max(next, 0.0);
        estimate = next;
    }
    throw Error(ErrorCode::PowerIterationDiverged, "power iteration did not converge");
}

OffspringMatrix offspring_check(const SbmParams& p) {
    const std::size_t m = p.n_blocks();
    OffspringMatrix out;
    out.mu = SquareMatrix(m);
    for (std::size_t l = 0; l < m; ++l)
        for (std::size_t k = 0; k < m; ++k) out.mu(l, k) = p.lambda(l, k) * p.pi[k];
    out.irreducible = is_irreducible(out.mu);
    out.perron_root = perron_root(out.mu);
    out.supercritical = out.perron_root > 1.0;
    return out;
}

BlockSizes sample_block_sizes(const SbmParams& p, Rng& rng) {
    return BlockSizes{sample_multinomial(rng, p.n_population, p.pi)};
}

std::size_t Graph::edge_count() const {
    std::size_t twice = 0;
    for (const auto& nb : adjacency) twice += nb.size();
    return twice / 2;
}

bool Graph::has_edge(std::uint32_t i, std::uint32_t j) const {
    const auto& nb = adjacency[i];
    return std::binary_search(nb.begin(), nb.end(), j);
}

namespace {

// Visits the indices of successes among `count` Bernoulli(p) trials by
// geometric skipping.
template <typename Visit>
void for_each_success(Rng& rng, std::uint64_t count, double p, Visit&& visit) {
    if (count == 0 || p <= 0.0) return;
    if (p >= 1.0) {
        for (std::uint64_t i = 0; i < count; ++i) visit(i);
        return;
    }
    const double log_q = std::log1p(-p);
    double pos = -1.0;
    for (;;) {
        pos += 1.0 + std::floor(std::log(rng.uniform_open()) / log_q);
        if (pos >= static_cast<double>(count)) return;
        visit(static_cast<std::uint64_t>(pos));
    }
}

}  // namespace

Graph sample_adjacency(const SbmParams& p, const BlockSizes& sizes, Rng& rng, std::int64_t max_vertices) {
    const std::int64_t n = sizes.total();
    if (n > max_vertices) {
        throw Error(ErrorCode::GraphTooLarge,
                    "explicit graph with " + std::to_string(n) + " vertices exceeds cap " + std::to_string(max_vertices));
    }
    const std::size_t m = sizes.size();
    std::vector<std::uint32_t> offset(m + 1, 0);
    for (std::size_t l = 0; l < m; ++l) offset[l + 1] = offset[l] + static_cast<std::uint32_t>(sizes[l]);

    Graph g;
    g.block_of.resize(static_cast<std::size_t>(n));
    for (std::size_t l = 0; l < m; ++l)
        std::fill(g.block_of.begin() + offset[l], g.block_of.begin() + offset[l + 1], static_cast<std::uint32_t>(l));
    g.adjacency.resize(static_cast<std::size_t>(n));

    auto add = [&](std::uint32_t i, std::uint32_t j) {
        g.adjacency[i].push_back(j);
        g.adjacency[j].push_back(i);
    };
    for (std::size_t k = 0; k < m; ++k) {
        const std::uint64_t nk = static_cast<std::uint64_t>(sizes[k]);
        // Within block k: pairs i < j enumerated row by row.
        {
            const double prob = p.edge_probability(k, k);
            const std::uint64_t pairs = nk * (nk - (nk > 0 ? 1 : 0)) / 2;
            std::uint64_t row = 0, row_start = 0;
            for_each_success(rng, pairs, prob, [&](std::uint64_t idx) {
                // Row r holds pairs (r, r+1..nk-1): nk-1-r entries.
                while (idx >= row_start + (nk - 1 - row)) {
                    row_start += nk - 1 - row;
                    ++row;
                }
                const std::uint64_t col = row + 1 + (idx - row_start);
                add(offset[k] + static_cast<std::uint32_t>(row), offset[k] + static_cast<std::uint32_t>(col));
            });
        }
        for (std::size_t l = k + 1; l < m; ++l) {
            const std::uint64_t nl = static_cast<std::uint64_t>(sizes[l]);
            for_each_success(rng, nk * nl, p.edge_probability(k, l), [&](std::uint64_t idx) {
                add(offset[k] + static_cast<std::uint32_t>(idx / nl), offset[l] + static_cast<std::uint32_t>(idx % nl));
            });
        }
    }
    for (auto& nb : g.adjacency) std::sort(nb.begin(), nb.end());
    return g;
}

}  // namespace crs
