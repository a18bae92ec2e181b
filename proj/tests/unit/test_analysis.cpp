#include <doctest.h>

#include <cmath>

#include "crs/analysis.hpp"
#include "helpers.hpp"

using namespace crs;
using crs::test::two_block;

namespace {

// Fluid path with constant state on a uniform grid.
FluidPath constant_path(const FluidState& x, double step) {
    FluidPath f;
    const auto nodes = static_cast<std::size_t>(std::llround(1.0 / step));
    for (std::size_t i = 0; i <= nodes; ++i) {
        f.grid.push_back(i == nodes ? 1.0 : static_cast<double>(i) * step);
        f.states.push_back(x);
    }
    f.step = step;
    return f;
}

Trajectory constant_trajectory(std::int64_t n, const ChainState& s) {
    Trajectory t(s.sizes, n, 0);
    t.push(s);
    t.finish(0);
    return t;
}

// Midpoint Riemann sum of the L1 deviation at resolution `dt`.
double riemann_d1(const Trajectory& traj, const FluidPath& fluid, double dt) {
    const RenormalizedPath path(traj);
    const auto cells = static_cast<std::int64_t>(std::llround(1.0 / dt));
    long double acc = 0.0L;
    for (std::int64_t i = 0; i < cells; ++i) {
        const double t = (static_cast<double>(i) + 0.5) * dt;
        const FluidState x = fluid.at(t);
        for (int c = 0; c < 3; ++c)
            for (std::size_t l = 0; l < traj.n_blocks(); ++l)
                acc += std::abs(path.value(t, c, l) - x.component(c)[l]);
    }
    return static_cast<double>(acc * dt);
}

double fluid_gap(const FluidPath& f, const FluidPath& g, double dt) {
    const auto cells = static_cast<std::int64_t>(std::llround(1.0 / dt));
    long double acc = 0.0L;
    for (std::int64_t i = 0; i < cells; ++i) {
        const double t = (static_cast<double>(i) + 0.5) * dt;
        const auto x = f.at(t), y = g.at(t);
        for (int c = 0; c < 3; ++c)
            for (std::size_t l = 0; l < x.n_blocks(); ++l) acc += std::abs(x.component(c)[l] - y.component(c)[l]);
    }
    return static_cast<double>(acc * dt);
}

ChainState fixed_state() {
    ChainState s;
    s.a = {0, 0};
    s.b = {20, 30};
    s.u = {40, 10};
    s.sizes = BlockSizes{{100, 100}};
    return s;
}

}  // namespace

TEST_CASE("path distance on constant paths") {
    const auto traj = constant_trajectory(200, fixed_state());
    const FluidState same{{0, 0}, {0.1, 0.15}, {0.2, 0.05}};
    CHECK(path_distance_l1(RenormalizedPath(traj), constant_path(same, 1.0 / 800.0)) == doctest::Approx(0.0).epsilon(1e-9));
    FluidState shifted = same;
    shifted.b[1] += 1.0;
    CHECK(std::abs(path_distance_l1(RenormalizedPath(traj), constant_path(shifted, 1.0 / 800.0)) - 1.0) < 1e-9);
    CHECK_THROWS_AS(path_distance_l1(RenormalizedPath(traj), constant_path(same, 1.0 / 400.0)), Error);
}

TEST_CASE("path distance agrees with a fine Riemann sum") {
    Rng rng(4);
    for (int c : {1, 3}) {
        const auto p = two_block(500, c, 0.02);
        const auto fluid = integrate(initial_state(p), p, {0.25 / 500.0, 1e-8});
        for (int rep = 0; rep < 3; ++rep) {
            const auto traj = run(p, sample_block_sizes(p, rng), rng);
            const double exact = path_distance_l1(RenormalizedPath(traj), fluid);
            CHECK(exact >= 0.0);
            CHECK(std::abs(exact - riemann_d1(traj, fluid, 1e-6)) < 1e-5);
        }
    }
}

TEST_CASE("path distance triangle inequality") {
    Rng rng(5);
    const auto p = two_block(400, 3, 0.02);
    const IntegrateOptions ode{0.25 / 400.0, 1e-8};
    for (int rep = 0; rep < 5; ++rep) {
        auto q = p;
        q.coupon_cap = 1 + static_cast<int>(rng.below(6));
        const auto f = integrate(initial_state(p), p, ode);
        const auto g = integrate(initial_state(q, 0.01 + 0.04 * rng.uniform()), q, ode);
        const auto traj = run(p, sample_block_sizes(p, rng), rng);
        const RenormalizedPath x(traj);
        const double gap = fluid_gap(f, g, 1e-5);
        CHECK(path_distance_l1(x, f) <= path_distance_l1(x, g) + gap + 1e-6);
        CHECK(path_distance_l1(x, g) <= path_distance_l1(x, f) + gap + 1e-6);
    }
}

TEST_CASE("ensemble runs") {
    const auto p = two_block(600, 3, 0.02);
    const auto fluid = integrate(initial_state(p), p, {0.25 / 600.0, 1e-8});
    EnsembleConfig cfg;
    cfg.params = p;
    cfg.master_seed = 77;
    cfg.probe_times = {0.0, 0.2};
    cfg.fluid = &fluid;

    SUBCASE("single replicate") {
        cfg.replicates = 1;
        const auto r = ensemble_run(cfg);
        CHECK(r.replicate_count == 1);
        for (const auto& s : r.scalars) {
            CHECK(s.summary.count == 1);
            CHECK(s.summary.mean == s.values[0]);
            CHECK(s.summary.median == s.values[0]);
            CHECK(s.summary.stddev == 0.0);
        }
        CHECK(r.scalar("discovery@0").values[0] == 12.0 / 600.0);
    }
    SUBCASE("determinism and thread independence") {
        cfg.replicates = 12;
        const auto a = ensemble_run(cfg);
        const auto b = ensemble_run(cfg);
        cfg.threads = 3;
        const auto c = ensemble_run(cfg);
        for (std::size_t i = 0; i < a.scalars.size(); ++i) {
            CHECK(a.scalars[i].values == b.scalars[i].values);
            CHECK(a.scalars[i].values == c.scalars[i].values);
            CHECK(a.scalars[i].summary.mean == c.scalars[i].summary.mean);
        }
    }
    SUBCASE("summaries match the raw values") {
        cfg.replicates = 30;
        const auto r = ensemble_run(cfg);
        for (const auto& s : r.scalars) {
            CHECK(std::abs(test::mean_of(s.values) - s.summary.mean) < 1e-12);
            CHECK(s.summary.min <= s.summary.median);
            CHECK(s.summary.median <= s.summary.max);
        }
        for (const auto& rep : r.replicates) {
            CHECK(rep.stop_time == rep.n0 / 600.0);
            CHECK(rep.final_interviewed == rep.stop_time);
            CHECK(rep.d1 >= 0.0);
        }
    }
    SUBCASE("streamed replicates equal stored ones") {
        cfg.replicates = 5;
        const auto r = ensemble_run(cfg);
        std::size_t seen = 0;
        for_each_replicate(cfg, [&](std::size_t i, const Trajectory& t) {
            CHECK(i == seen++);
            CHECK(t.n0() == r.replicates[i].n0);
        });
        CHECK(seen == 5);
    }
    SUBCASE("zero replicates rejected") {
        cfg.replicates = 0;
        CHECK_THROWS_AS(ensemble_run(cfg), Error);
    }
}

TEST_CASE("convergence sweep") {
    SweepConfig s;
    s.params = two_block(500, 3, 0.01);
    s.master_seed = 5;
    s.n_list = {500};
    s.replicates = 20;
    const auto one = convergence_sweep(s);
    REQUIRE(one.size() == 1);
    CHECK(one[0].n_population == 500);
    CHECK(one[0].replicate_count == 20);
    CHECK(one[0].log_d1 == std::log(one[0].mean_d1));

    s.replicates = 40;
    const auto doubled = convergence_sweep(s);
    const double se = std::sqrt(one[0].std_error * one[0].std_error + doubled[0].std_error * doubled[0].std_error);
    CHECK(std::abs(doubled[0].mean_d1 - one[0].mean_d1) < 2.0 * se);

    s.replicates = 20;
    s.n_list = {500, 2000};
    const auto two = convergence_sweep(s);
    REQUIRE(two.size() == 2);
    CHECK(two[1].mean_d1 < two[0].mean_d1);
}

TEST_CASE("stopping time table") {
    const auto p = two_block(1000, 1, 0.01);
    const auto rows = t0_vs_c_table(p, {1, 2, 3, 4, 5, 6});
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].t0 >= rows[i - 1].t0);
    CHECK(rows[0].coupon_cap == 1);

    auto zero = p;
    zero.lambda = SquareMatrix(2, 0.0);
    for (const auto& r : t0_vs_c_table(zero, {1, 2, 5}, {}, 0.05)) CHECK(std::abs(r.t0 - 0.05) <= 2e-4);
}

TEST_CASE("discovery at a fixed time") {
    EnsembleConfig cfg;
    cfg.params = two_block(1000, 1, 0.01);
    cfg.replicates = 200;
    cfg.master_seed = 3;
    const auto at0 = discovery_at_time(cfg, 0.0);
    CHECK(at0.stochastic.mean == 0.01);
    CHECK(at0.stochastic.stddev == 0.0);
    CHECK(at0.fluid_prediction == doctest::Approx(0.01));

    const auto d = discovery_at_time(cfg, 0.2);
    CHECK(std::abs(d.stochastic.mean - d.fluid_prediction) < 0.05);
    CHECK(std::abs(d.stochastic.mean - 0.213) <= 3.0 * d.stochastic.stddev);
    CHECK_THROWS_AS(discovery_at_time(cfg, 1.5), Error);
}
