#pragma once

// Monte-Carlo comparison of the stochastic chain against its fluid limit.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crs/fluid.hpp"
#include "crs/sbm_model.hpp"
#include "crs/simulator.hpp"
#include "crs/stats.hpp"

namespace crs {

/// d1 = int_0^1 (|A^N_t - a_t| + |B^N_t - b_t| + |U^N_t - u_t|) dt.
///
/// The stochastic path is constant on [n/N, (n+1)/N) and the fluid path is
/// linear between its grid nodes, so the integral is evaluated exactly on
/// every piece of the merged partition. Throws GridMismatch when the fluid
/// step is coarser than 1/(4N).
double path_distance_l1(const RenormalizedPath& stochastic, const FluidPath& fluid);

/// Runs `count` jobs on up to `threads` workers. `job(i)` must only touch
/// slot i of its outputs.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job);

struct EnsembleConfig {
    SbmParams params;
    int replicates = 100;
    std::uint64_t master_seed = 0;
    std::vector<double> probe_times;
    /// When set, d1 against this path is computed for every replicate.
    const FluidPath* fluid = nullptr;
    bool explicit_graph = false;
    HiddenPool hidden_pool = HiddenPool::Literal;  // distributional engine only
    int threads = 1;
};

struct ReplicateResult {
    std::int64_t n0 = 0;
    double stop_time = 0.0;        // n0 / N
    double final_interviewed = 0;  // |U_N| / N
    double final_explored = 0;     // (|A_N| + |B_N| + |U_N|) / N
    double d1 = 0.0;               // NaN when no fluid path was given
    std::vector<double> discovery;  // (|A| + |B|) / N at each probe time
};

struct ScalarSeries {
    std::string name;
    std::vector<double> values;
    Summary summary;
};

struct EnsembleResult {
    int replicate_count = 0;
    std::vector<ReplicateResult> replicates;
    std::vector<ScalarSeries> scalars;

    const ScalarSeries& scalar(const std::string& name) const;
};

/// Name of the per-replicate discovery scalar at probe time t.
std::string discovery_scalar_name(double t);

/// Per-replicate scalars of one trajectory (d1 only when cfg.fluid is set).
ReplicateResult measure_replicate(const EnsembleConfig& cfg, const Trajectory& traj);

/// Builds the named scalar series and their summaries.
EnsembleResult aggregate_replicates(const EnsembleConfig& cfg, std::vector<ReplicateResult> replicates);

/// Independent replicates (fresh block sizes and trajectory each). Replicate
/// i uses Rng::stream(master_seed, i), so results do not depend on `threads`.
EnsembleResult ensemble_run(const EnsembleConfig& cfg);

/// Ensemble fed to a callback instead of being stored; used by the
/// trajectory export. The callback runs on the calling thread, in replicate
/// order.
void for_each_replicate(const EnsembleConfig& cfg,
                        const std::function<void(std::size_t, const Trajectory&)>& visit);

struct ConvergencePoint {
    std::int64_t n_population = 0;
    double mean_d1 = 0.0;
    double log_d1 = 0.0;
    double std_error = 0.0;
    int replicate_count = 0;
};

struct SweepConfig {
    SbmParams params;  // n_population is overridden per entry
    std::vector<std::int64_t> n_list;
    int replicates = 20;
    std::uint64_t master_seed = 0;
    IntegrateOptions ode;
    HiddenPool hidden_pool = HiddenPool::Literal;
    int threads = 1;
};

/// The fluid path is integrated once with step min(ode.step, 1/(4 max N)).
std::vector<ConvergencePoint> convergence_sweep(const SweepConfig& cfg);

struct T0Row {
    int coupon_cap = 0;
    double t0 = 0.0;
};

/// t0 of the fluid limit for each coupon cap, from the default initial state
/// with active mass `active_mass` (seed_fraction when negative).
std::vector<T0Row> t0_vs_c_table(const SbmParams& base, const std::vector<int>& caps,
                                 IntegrateOptions ode = {}, double active_mass = -1.0);

struct DiscoverySummary {
    double probe_time = 0.0;
    Summary stochastic;
    double fluid_prediction = 0.0;  // |a_t| + |b_t|
};

DiscoverySummary discovery_at_time(const EnsembleConfig& cfg, double t, IntegrateOptions ode = {});

}  // namespace crs
