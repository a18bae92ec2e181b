#pragma once

// Discrete-time chain-referral process X_n = (A_n, B_n, U_n) on an SBM.
//
// The distributional engine samples the conditional laws of one interview
// directly (no adjacency is stored). `run_on_graph` walks a fixed sampled
// graph instead and serves as an independent cross-check.

#include <cstdint>
#include <span>
#include <vector>

#include "crs/random.hpp"
#include "crs/sbm_model.hpp"

namespace crs {

/// Size of the never-named pool that H_n is drawn from. `Literal` is
/// N_l - A_{n-1} - B_{n-1} - U_n, which removes the interviewee twice
/// (once in A, once in U). `Exact` removes it once and matches the
/// explicit-graph walk exactly; the two differ by one individual in the
/// interviewee's block.
enum class HiddenPool { Literal, Exact };

struct ChainState {
    std::vector<std::int64_t> a;  // active coupon holders per block
    std::vector<std::int64_t> b;  // named but never given a coupon
    std::vector<std::int64_t> u;  // interviewed
    BlockSizes sizes;
    std::int64_t step = 0;

    std::size_t n_blocks() const noexcept { return a.size(); }
    std::int64_t total_active() const;
    std::int64_t total_found() const;
    std::int64_t total_interviewed() const;

    bool operator==(const ChainState&) const = default;
};

/// Random quantities drawn during one interview.
struct StepDraw {
    std::size_t interviewee_block = 0;
    std::vector<std::int64_t> h;        // newly named
    std::vector<std::int64_t> k;        // re-named, previously inactive
    std::vector<std::int64_t> z;        // h + k
    std::vector<std::int64_t> coupons;  // C_n
    std::vector<std::int64_t> coupons_to_known;  // share of C_n that landed on k-type candidates
};

struct Contacts {
    std::vector<std::int64_t> h;
    std::vector<std::int64_t> k;
    std::vector<std::int64_t> z;
};

/// A_0 ~ Multinomial(floor(seed_fraction*N); pi), B_0 = U_0 = 0. Draws that
/// put more seeds in a block than it holds are redrawn (up to
/// `max_rejections` times, then SeedsExceedBlock).
ChainState init_seeds(const SbmParams& p, const BlockSizes& sizes, Rng& rng, int max_rejections = 1000);

/// Block of the next interviewee, chosen proportionally to active coupons.
std::size_t select_interviewee(const ChainState& s, Rng& rng);

/// H and K for an interviewee from block `k`. `s.u` must already include
/// the interviewee; `s.a` must not yet have been decremented.
Contacts sample_contacts(const ChainState& s, const SbmParams& p, std::size_t k, Rng& rng,
                         HiddenPool pool = HiddenPool::Literal);

/// C_n: everything when sum(z) <= cap, otherwise a multivariate
/// hypergeometric draw of `cap` candidates.
std::vector<std::int64_t> allocate_coupons(std::span<const std::int64_t> z, int cap, Rng& rng);

struct StepResult {
    ChainState state;
    StepDraw draw;
};

/// One interview. Throws NoActiveCoupons when sum(a) == 0.
StepResult step(const ChainState& s, const SbmParams& p, Rng& rng, HiddenPool pool = HiddenPool::Literal);

/// In-place variant used by the run loops.
void step_in_place(ChainState& s, const SbmParams& p, Rng& rng, StepDraw& draw,
                   HiddenPool pool = HiddenPool::Literal);

/// Full path X_0..X_N stored as a flat array of counts; constant after n0.
class Trajectory {
public:
    Trajectory(BlockSizes sizes, std::int64_t n_population, std::uint64_t seed);

    void push(const ChainState& s);
    /// Pads with copies of the last state up to step N and records n0.
    void finish(std::int64_t n0);

    std::int64_t n_population() const noexcept { return n_; }
    std::size_t n_blocks() const noexcept { return m_; }
    std::int64_t n0() const noexcept { return n0_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const BlockSizes& sizes() const noexcept { return sizes_; }
    std::size_t length() const noexcept { return counts_.size() / (3 * m_); }

    /// Counts at step n; component 0 = A, 1 = B, 2 = U.
    std::span<const std::int64_t> counts(std::int64_t n, int component) const;
    ChainState state(std::int64_t n) const;

    std::int64_t total(std::int64_t n, int component) const;

private:
    BlockSizes sizes_;
    std::int64_t n_;
    std::size_t m_;
    std::uint64_t seed_;
    std::int64_t n0_ = 0;
    std::vector<std::int64_t> counts_;
};

/// Runs the distributional chain from fresh seeds until no coupon is left.
Trajectory run(const SbmParams& p, const BlockSizes& sizes, Rng& rng, HiddenPool pool = HiddenPool::Literal);

/// Same, starting from a given initial state.
Trajectory run_from(const SbmParams& p, ChainState initial, Rng& rng, HiddenPool pool = HiddenPool::Literal);

/// Interview process on an explicit graph. Seeds are drawn as in
/// init_seeds, then placed on uniformly chosen vertices of each block.
Trajectory run_on_graph(const SbmParams& p, const Graph& g, Rng& rng,
                        std::int64_t max_vertices = kDefaultGraphCap);

/// Same, with explicitly chosen seed vertices.
Trajectory run_on_graph_from(const SbmParams& p, const Graph& g, std::span<const std::uint32_t> seeds, Rng& rng);

/// t -> X_{floor(N t)} / N on [0, 1].
class RenormalizedPath {
public:
    explicit RenormalizedPath(const Trajectory& traj) : traj_(&traj) {}

    std::int64_t n_population() const noexcept { return traj_->n_population(); }
    std::size_t n_blocks() const noexcept { return traj_->n_blocks(); }

    std::int64_t index_at(double t) const;
    /// Component value (0 = a, 1 = b, 2 = u) of block l at time t.
    double value(double t, int component, std::size_t l) const;
    /// Value on the n-th piece [n/N, (n+1)/N).
    double piece(std::int64_t n, int component, std::size_t l) const;

    const Trajectory& trajectory() const noexcept { return *traj_; }

private:
    const Trajectory* traj_;
};

RenormalizedPath renormalize_path(const Trajectory& t);

}  // namespace crs
