#include "crs/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crs {

namespace {

std::int64_t sum(std::span<const std::int64_t> v) { return std::accumulate(v.begin(), v.end(), std::int64_t{0}); }

std::vector<std::int64_t> draw_seed_counts(const SbmParams& p, const BlockSizes& sizes, Rng& rng,
                                           int max_rejections) {
    const std::int64_t seeds = p.seed_count();
    if (seeds < 1) throw Error(ErrorCode::EmptySeeds, "floor(seed_fraction * N) < 1");
    if (seeds > sizes.total()) throw Error(ErrorCode::SeedsExceedBlock, "more seeds than individuals");
    for (int attempt = 0; attempt <= max_rejections; ++attempt) {
        auto a = sample_multinomial(rng, seeds, p.pi);
        bool fits = true;
        for (std::size_t l = 0; l < a.size(); ++l) fits = fits && a[l] <= sizes[l];
        if (fits) return a;
    }
    throw Error(ErrorCode::SeedsExceedBlock,
                "seed draw exceeded a block size after " + std::to_string(max_rejections) + " redraws");
}

}  // namespace

std::int64_t ChainState::total_active() const { return sum(a); }
std::int64_t ChainState::total_found() const { return sum(b); }
std::int64_t ChainState::total_interviewed() const { return sum(u); }

ChainState init_seeds(const SbmParams& p, const BlockSizes& sizes, Rng& rng, int max_rejections) {
    const std::size_t m = p.n_blocks();
    ChainState s;
    s.a = draw_seed_counts(p, sizes, rng, max_rejections);
    s.b.assign(m, 0);
    s.u.assign(m, 0);
    s.sizes = sizes;
    s.step = 0;
    return s;
}

std::size_t select_interviewee(const ChainState& s, Rng& rng) {
    if (s.total_active() <= 0) throw Error(ErrorCode::NoActiveCoupons, "no active coupon left");
    return sample_weighted_index(rng, s.a);
}

Contacts sample_contacts(const ChainState& s, const SbmParams& p, std::size_t k, Rng& rng, HiddenPool pool_kind) {
    const std::size_t m = s.n_blocks();
    Contacts out{std::vector<std::int64_t>(m), std::vector<std::int64_t>(m), std::vector<std::int64_t>(m)};
    for (std::size_t l = 0; l < m; ++l) {
        const double prob = p.edge_probability(k, l);
        const std::int64_t back = (pool_kind == HiddenPool::Exact && l == k) ? 1 : 0;
        const std::int64_t pool = std::max<std::int64_t>(s.sizes[l] - s.a[l] - s.b[l] - s.u[l] + back, 0);
        out.h[l] = sample_binomial(rng, pool, prob);
    }
    for (std::size_t l = 0; l < m; ++l) {
        out.k[l] = sample_binomial(rng, s.b[l], p.edge_probability(k, l));
        out.z[l] = out.h[l] + out.k[l];
    }
    return out;
}

std::vector<std::int64_t> allocate_coupons(std::span<const std::int64_t> z, int cap, Rng& rng) {
    if (sum(z) <= cap) return {z.begin(), z.end()};
    return sample_multivariate_hypergeometric(rng, cap, z);
}

void step_in_place(ChainState& s, const SbmParams& p, Rng& rng, StepDraw& draw, HiddenPool pool) {
    const std::size_t k = select_interviewee(s, rng);
    const std::size_t m = s.n_blocks();
    s.u[k] += 1;
    Contacts contacts = sample_contacts(s, p, k, rng, pool);
    auto coupons = allocate_coupons(contacts.z, p.coupon_cap, rng);

    draw.interviewee_block = k;
    draw.coupons_to_known.assign(m, 0);
    for (std::size_t l = 0; l < m; ++l) {
        if (coupons[l] > 0 && contacts.k[l] > 0)
            draw.coupons_to_known[l] = sample_hypergeometric(rng, coupons[l], contacts.k[l], contacts.z[l]);
    }
    s.a[k] -= 1;
    for (std::size_t l = 0; l < m; ++l) {
        s.a[l] += coupons[l];
        s.b[l] += contacts.h[l] - coupons[l];
    }
    s.step += 1;

    draw.h = std::move(contacts.h);
    draw.k = std::move(contacts.k);
    draw.z = std::move(contacts.z);
    draw.coupons = std::move(coupons);
}

StepResult step(const ChainState& s, const SbmParams& p, Rng& rng, HiddenPool pool) {
    StepResult r{s, {}};
    step_in_place(r.state, p, rng, r.draw, pool);
    return r;
}

Trajectory::Trajectory(BlockSizes sizes, std::int64_t n_population, std::uint64_t seed)
    : sizes_(std::move(sizes)), n_(n_population), m_(sizes_.size()), seed_(seed) {
    counts_.reserve(static_cast<std::size_t>(n_ + 1) * 3 * m_);
}

void Trajectory::push(const ChainState& s) {
    counts_.insert(counts_.end(), s.a.begin(), s.a.end());
    counts_.insert(counts_.end(), s.b.begin(), s.b.end());
    counts_.insert(counts_.end(), s.u.begin(), s.u.end());
}

void Trajectory::finish(std::int64_t n0) {
    n0_ = n0;
    const std::size_t row = 3 * m_;
    while (length() < static_cast<std::size_t>(n_ + 1)) {
        const std::size_t last = counts_.size() - row;
        for (std::size_t i = 0; i < row; ++i) counts_.push_back(counts_[last + i]);
    }
}

std::span<const std::int64_t> Trajectory::counts(std::int64_t n, int component) const {
    const std::size_t offset = static_cast<std::size_t>(n) * 3 * m_ + static_cast<std::size_t>(component) * m_;
    return {counts_.data() + offset, m_};
}

ChainState Trajectory::state(std::int64_t n) const {
    ChainState s;
    auto copy = [&](int c) {
        auto v = counts(n, c);
        return std::vector<std::int64_t>(v.begin(), v.end());
    };
    s.a = copy(0);
    s.b = copy(1);
    s.u = copy(2);
    s.sizes = sizes_;
    s.step = n;
    return s;
}

std::int64_t Trajectory::total(std::int64_t n, int component) const { return sum(counts(n, component)); }

Trajectory run_from(const SbmParams& p, ChainState s, Rng& rng, HiddenPool pool) {
    const std::int64_t n_pop = p.n_population;
    Trajectory traj(s.sizes, n_pop, rng.seed());
    traj.push(s);
    StepDraw draw;
    std::int64_t n0 = 0;
    while (s.total_active() > 0 && s.step < n_pop) {
        step_in_place(s, p, rng, draw, pool);
        traj.push(s);
        n0 = s.step;
    }
    traj.finish(n0);
    return traj;
}

Trajectory run(const SbmParams& p, const BlockSizes& sizes, Rng& rng, HiddenPool pool) {
    return run_from(p, init_seeds(p, sizes, rng), rng, pool);
}

Trajectory run_on_graph_from(const SbmParams& p, const Graph& g, std::span<const std::uint32_t> seeds, Rng& rng) {
    enum class Mode : std::uint8_t { Hidden, Found, Active, Off };
    const std::size_t m = p.n_blocks();
    const std::size_t n = g.vertex_count();

    BlockSizes sizes{std::vector<std::int64_t>(m, 0)};
    for (auto blk : g.block_of) sizes.sizes[blk] += 1;

    std::vector<Mode> mode(n, Mode::Hidden);
    std::vector<std::uint32_t> active(seeds.begin(), seeds.end());
    ChainState s;
    s.a.assign(m, 0);
    s.b.assign(m, 0);
    s.u.assign(m, 0);
    s.sizes = sizes;
    for (auto v : active) {
        mode[v] = Mode::Active;
        s.a[g.block_of[v]] += 1;
    }

    Trajectory traj(sizes, static_cast<std::int64_t>(n), rng.seed());
    traj.push(s);
    std::vector<std::uint32_t> candidates;
    std::int64_t n0 = 0;
    while (!active.empty()) {
        const auto pick = static_cast<std::size_t>(rng.below(active.size()));
        const std::uint32_t v = active[pick];
        active[pick] = active.back();
        active.pop_back();
        mode[v] = Mode::Off;
        s.a[g.block_of[v]] -= 1;
        s.u[g.block_of[v]] += 1;

        candidates.clear();
        for (auto w : g.adjacency[v]) {
            if (mode[w] == Mode::Hidden) {
                mode[w] = Mode::Found;
                s.b[g.block_of[w]] += 1;
                candidates.push_back(w);
            } else if (mode[w] == Mode::Found) {
                candidates.push_back(w);
            }
        }
        // Partial Fisher-Yates: the first `given` candidates receive coupons.
        const std::size_t given = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(p.coupon_cap));
        if (candidates.size() > given) {
            for (std::size_t i = 0; i < given; ++i) {
                const auto j = i + static_cast<std::size_t>(rng.below(candidates.size() - i));
                std::swap(candidates[i], candidates[j]);
            }
        }
        for (std::size_t i = 0; i < given; ++i) {
            const auto w = candidates[i];
            mode[w] = Mode::Active;
            s.b[g.block_of[w]] -= 1;
            s.a[g.block_of[w]] += 1;
            active.push_back(w);
        }
        s.step += 1;
        traj.push(s);
        n0 = s.step;
    }
    traj.finish(n0);
    return traj;
}

Trajectory run_on_graph(const SbmParams& p, const Graph& g, Rng& rng, std::int64_t max_vertices) {
    const auto n = static_cast<std::int64_t>(g.vertex_count());
    if (n > max_vertices) throw Error(ErrorCode::GraphTooLarge, "explicit graph exceeds vertex cap");
    const std::size_t m = p.n_blocks();
    std::vector<std::vector<std::uint32_t>> members(m);
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v) members[g.block_of[v]].push_back(v);
    BlockSizes sizes{std::vector<std::int64_t>(m)};
    for (std::size_t l = 0; l < m; ++l) sizes.sizes[l] = static_cast<std::int64_t>(members[l].size());

    const auto counts = draw_seed_counts(p, sizes, rng, 1000);
    std::vector<std::uint32_t> seeds;
    for (std::size_t l = 0; l < m; ++l) {
        auto& pool = members[l];
        for (std::int64_t i = 0; i < counts[l]; ++i) {
            const auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng.below(pool.size() - static_cast<std::size_t>(i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
            seeds.push_back(pool[static_cast<std::size_t>(i)]);
        }
    }
    return run_on_graph_from(p, g, seeds, rng);
}

std::int64_t RenormalizedPath::index_at(double t) const {
    const auto n = traj_->n_population();
    auto idx = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * t));
    return std::clamp<std::int64_t>(idx, 0, n);
}

double RenormalizedPath::piece(std::int64_t n, int component, std::size_t l) const {
    return static_cast<double>(traj_->counts(n, component)[l]) / static_cast<double>(traj_->n_population());
}

double RenormalizedPath::value(double t, int component, std::size_t l) const {
    return piece(index_at(t), component, l);
}

RenormalizedPath renormalize_path(const Trajectory& t) { return RenormalizedPath(t); }

}  // namespace crs
