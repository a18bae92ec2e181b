#include "crs/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace crs {

namespace {

// int_s^e |c - x(t)| dt for x linear from xs to xe.
double abs_linear_integral(double c, double xs, double xe, double len) {
    const double ds = c - xs;
    const double de = c - xe;
    if ((ds >= 0.0 && de >= 0.0) || (ds <= 0.0 && de <= 0.0)) return 0.5 * (std::abs(ds) + std::abs(de)) * len;
    const double total = std::abs(ds) + std::abs(de);
    return 0.5 * (ds * ds + de * de) / total * len;
}

}  // namespace

double path_distance_l1(const RenormalizedPath& stochastic, const FluidPath& fluid) {
    const std::int64_t n = stochastic.n_population();
    const std::size_t m = stochastic.n_blocks();
    if (fluid.grid.size() < 2 || fluid.grid.front() != 0.0 || fluid.grid.back() < 1.0)
        throw Error(ErrorCode::GridMismatch, "fluid path must cover [0, 1]");
    if (fluid.states.front().n_blocks() != m) throw Error(ErrorCode::GridMismatch, "block count differs");
    if (fluid.step > 0.25 / static_cast<double>(n) * (1.0 + 1e-9)) {
        std::ostringstream os;
        os << "fluid step " << fluid.step << " is coarser than 1/(4N) = " << 0.25 / static_cast<double>(n);
        throw Error(ErrorCode::GridMismatch, os.str());
    }

    const auto& grid = fluid.grid;
    const double inv_n = 1.0 / static_cast<double>(n);
    KahanSum total;
    std::size_t g = 0;  // grid[g] <= current segment start < grid[g+1]
    double seg_start = 0.0;
    std::vector<double> left(3 * m), right(3 * m);
    auto fluid_at = [&](double t, std::vector<double>& out) {
        const double w = (t - grid[g]) / (grid[g + 1] - grid[g]);
        for (int c = 0; c < 3; ++c) {
            const auto& lo = fluid.states[g].component(c);
            const auto& hi = fluid.states[g + 1].component(c);
            for (std::size_t l = 0; l < m; ++l) out[c * m + l] = lo[l] + w * (hi[l] - lo[l]);
        }
    };

    for (std::int64_t piece = 0; piece < n; ++piece) {
        const double piece_end = piece + 1 == n ? 1.0 : static_cast<double>(piece + 1) * inv_n;
        while (seg_start < piece_end) {
            while (g + 2 < grid.size() && grid[g + 1] <= seg_start) ++g;
            const double seg_end = std::min(piece_end, grid[g + 1]);
            fluid_at(seg_start, left);
            fluid_at(seg_end, right);
            const double len = seg_end - seg_start;
            for (int c = 0; c < 3; ++c)
                for (std::size_t l = 0; l < m; ++l)
                    total.add(abs_linear_integral(stochastic.piece(piece, c, l), left[c * m + l], right[c * m + l], len));
            seg_start = seg_end;
        }
    }
    return total.value();
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

const ScalarSeries& EnsembleResult::scalar(const std::string& name) const {
    for (const auto& s : scalars)
        if (s.name == name) return s;
    throw std::out_of_range("no scalar named " + name);
}

std::string discovery_scalar_name(double t) {
    std::ostringstream os;
    os << "discovery@" << t;
    return os.str();
}

namespace {

Trajectory simulate_replicate(const EnsembleConfig& cfg, std::size_t i) {
    Rng rng = Rng::stream(cfg.master_seed, i);
    const BlockSizes sizes = sample_block_sizes(cfg.params, rng);
    if (cfg.explicit_graph) {
        const Graph g = sample_adjacency(cfg.params, sizes, rng);
        return run_on_graph(cfg.params, g, rng);
    }
    return run(cfg.params, sizes, rng, cfg.hidden_pool);
}

}  // namespace

ReplicateResult measure_replicate(const EnsembleConfig& cfg, const Trajectory& traj) {
    const double n = static_cast<double>(traj.n_population());
    const std::int64_t last = traj.n_population();
    ReplicateResult r;
    r.n0 = traj.n0();
    r.stop_time = static_cast<double>(traj.n0()) / n;
    r.final_interviewed = static_cast<double>(traj.total(last, 2)) / n;
    r.final_explored = static_cast<double>(traj.total(last, 0) + traj.total(last, 1) + traj.total(last, 2)) / n;
    const RenormalizedPath path(traj);
    r.d1 = cfg.fluid ? path_distance_l1(path, *cfg.fluid) : std::numeric_limits<double>::quiet_NaN();
    for (double t : cfg.probe_times) {
        const auto idx = path.index_at(t);
        r.discovery.push_back(static_cast<double>(traj.total(idx, 0) + traj.total(idx, 1)) / n);
    }
    return r;
}

namespace {

void add_series(EnsembleResult& out, std::string name, std::vector<double> values) {
    ScalarSeries s{std::move(name), std::move(values), {}};
    s.summary = summarize(s.values);
    out.scalars.push_back(std::move(s));
}

}  // namespace

EnsembleResult aggregate_replicates(const EnsembleConfig& cfg, std::vector<ReplicateResult> replicates) {
    EnsembleResult out;
    out.replicate_count = static_cast<int>(replicates.size());
    out.replicates = std::move(replicates);
    auto collect = [&](auto field) {
        std::vector<double> v;
        v.reserve(out.replicates.size());
        for (const auto& r : out.replicates) v.push_back(field(r));
        return v;
    };
    add_series(out, "n0", collect([](const ReplicateResult& r) { return static_cast<double>(r.n0); }));
    add_series(out, "stop_time", collect([](const ReplicateResult& r) { return r.stop_time; }));
    add_series(out, "final_interviewed", collect([](const ReplicateResult& r) { return r.final_interviewed; }));
    add_series(out, "final_explored", collect([](const ReplicateResult& r) { return r.final_explored; }));
    if (cfg.fluid) add_series(out, "d1", collect([](const ReplicateResult& r) { return r.d1; }));
    for (std::size_t j = 0; j < cfg.probe_times.size(); ++j)
        add_series(out, discovery_scalar_name(cfg.probe_times[j]),
                   collect([j](const ReplicateResult& r) { return r.discovery[j]; }));
    return out;
}

EnsembleResult ensemble_run(const EnsembleConfig& cfg) {
    if (cfg.replicates < 1) throw Error(ErrorCode::ValidationError, "replicates must be >= 1");
    validate_params(cfg.params);
    const auto count = static_cast<std::size_t>(cfg.replicates);
    std::vector<ReplicateResult> replicates(count);
    parallel_for(count, cfg.threads, [&](std::size_t i) {
        const Trajectory traj = simulate_replicate(cfg, i);
        replicates[i] = measure_replicate(cfg, traj);
    });
    return aggregate_replicates(cfg, std::move(replicates));
}

void for_each_replicate(const EnsembleConfig& cfg, const std::function<void(std::size_t, const Trajectory&)>& visit) {
    validate_params(cfg.params);
    // Simulate in batches so memory stays bounded while workers stay busy.
    const auto count = static_cast<std::size_t>(std::max(cfg.replicates, 0));
    const std::size_t batch = static_cast<std::size_t>(std::max(cfg.threads, 1)) * 4;
    for (std::size_t first = 0; first < count; first += batch) {
        const std::size_t n = std::min(batch, count - first);
        std::vector<std::optional<Trajectory>> slots(n);
        parallel_for(n, cfg.threads, [&](std::size_t i) { slots[i].emplace(simulate_replicate(cfg, first + i)); });
        for (std::size_t i = 0; i < n; ++i) visit(first + i, *slots[i]);
    }
}

std::vector<ConvergencePoint> convergence_sweep(const SweepConfig& cfg) {
    if (cfg.n_list.empty()) return {};
    const std::int64_t n_max = *std::max_element(cfg.n_list.begin(), cfg.n_list.end());
    IntegrateOptions ode = cfg.ode;
    ode.step = std::min(ode.step, 0.25 / static_cast<double>(n_max));
    SbmParams base = cfg.params;
    base.n_population = n_max;
    const FluidPath fluid = integrate(initial_state(base), base, ode);

    std::vector<ConvergencePoint> out;
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
        EnsembleConfig e;
        e.params = cfg.params;
        e.params.n_population = cfg.n_list[i];
        e.replicates = cfg.replicates;
        e.master_seed = splitmix64(cfg.master_seed + static_cast<std::uint64_t>(cfg.n_list[i]));
        e.fluid = &fluid;
        e.hidden_pool = cfg.hidden_pool;
        e.threads = cfg.threads;
        const auto result = ensemble_run(e);
        const auto& d1 = result.scalar("d1").summary;
        out.push_back({cfg.n_list[i], d1.mean, std::log(d1.mean), d1.std_error, cfg.replicates});
    }
    return out;
}

std::vector<T0Row> t0_vs_c_table(const SbmParams& base, const std::vector<int>& caps, IntegrateOptions ode,
                                 double active_mass) {
    std::vector<T0Row> rows;
    for (int c : caps) {
        SbmParams p = base;
        p.coupon_cap = c;
        const FluidState x0 = initial_state(p, active_mass < 0.0 ? p.seed_fraction : active_mass);
        rows.push_back({c, find_t0(integrate(x0, p, ode))});
    }
    return rows;
}

DiscoverySummary discovery_at_time(const EnsembleConfig& cfg, double t, IntegrateOptions ode) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::ValidationError, "probe time must lie in [0, 1]");
    EnsembleConfig e = cfg;
    e.probe_times = {t};
    e.fluid = nullptr;
    const auto result = ensemble_run(e);
    DiscoverySummary out;
    out.probe_time = t;
    out.stochastic = result.scalar(discovery_scalar_name(t)).summary;
    const FluidPath fluid = integrate(initial_state(cfg.params), cfg.params, ode);
    const FluidState x = fluid.at(t);
    for (std::size_t l = 0; l < x.n_blocks(); ++l) out.fluid_prediction += x.a[l] + x.b[l];
    return out;
}

}  // namespace crs
