#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "crs/fluid.hpp"
#include "helpers.hpp"

using namespace crs;
using crs::test::two_block;

namespace {

// E[min(Z, c)] by direct summation of the Poisson series up to h = 500.
double coupon_series(double rate, int cap) {
    long double total = 0.0L;
    for (int h = 1; h <= 500; ++h) {
        const long double log_pmf = h * std::log(static_cast<long double>(rate)) - rate - std::lgamma(h + 1.0L);
        total += std::min(h, cap) * std::exp(log_pmf);
    }
    return static_cast<double>(total);
}

FluidState random_state(const SbmParams& p, Rng& rng) {
    const std::size_t m = p.n_blocks();
    FluidState x{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m)};
    for (std::size_t l = 0; l < m; ++l) {
        double w[3] = {rng.uniform() + 1e-3, rng.uniform(), rng.uniform()};
        const double fill = rng.uniform() * p.pi[l] / (w[0] + w[1] + w[2]);
        x.a[l] = w[0] * fill;
        x.b[l] = w[1] * fill;
        x.u[l] = w[2] * fill;
    }
    return x;
}

double total(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

TEST_CASE("rates") {
    const auto p = two_block(1000, 3, 0.05);
    SUBCASE("initial state") {
        const FluidState x{{0.05 / 3.0, 0.10 / 3.0}, {0, 0}, {0, 0}};
        const auto r = rates(x, p);
        CHECK(r.lambda(0, 0) == doctest::Approx(2.0 * (1.0 / 3.0 - 0.05 / 3.0)));
        CHECK(r.lambda(0, 1) == doctest::Approx(3.0 * (2.0 / 3.0 - 0.10 / 3.0)));
        CHECK(r.total[0] == doctest::Approx(r.lambda(0, 0) + r.lambda(0, 1)));
    }
    SUBCASE("exhausted pool") {
        const FluidState x{{0.1, 0.2}, {0, 0}, {1.0 / 3.0 - 0.1, 2.0 / 3.0 - 0.2}};
        const auto r = rates(x, p);
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(r.total[k] == doctest::Approx(0.0).epsilon(1e-15));
            for (std::size_t l = 0; l < 2; ++l) CHECK(r.lambda(k, l) == doctest::Approx(0.0));
        }
    }
    SUBCASE("mu never exceeds lambda") {
        Rng rng(1);
        for (int i = 0; i < 1000; ++i) {
            const auto r = rates(random_state(p, rng), p);
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l) {
                    CHECK(r.mu(k, l) <= r.lambda(k, l));
                    CHECK(r.mu(k, l) >= 0.0);
                }
        }
    }
}

TEST_CASE("expected coupons") {
    CHECK(expected_coupons(0.0, 3) == 0.0);
    CHECK(expected_coupons(1.0, 1) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
    CHECK(std::abs(expected_coupons(50.0, 3) - 3.0) < 1e-10);

    Rng rng(2);
    for (int i = 0; i < 2000; ++i) {
        const double rate = 100.0 * rng.uniform();
        const int cap = 1 + static_cast<int>(rng.below(20));
        const double e = expected_coupons(rate, cap);
        CAPTURE(rate);
        CAPTURE(cap);
        CHECK(std::abs(e - coupon_series(rate, cap)) < 1e-12);
        CHECK(e >= 0.0);
        CHECK(e <= std::min(rate, static_cast<double>(cap)) + 1e-15);
        CHECK(expected_coupons(rate + 0.01, cap) >= e);
        CHECK(expected_coupons(rate, cap + 1) >= e);
    }
}

TEST_CASE("vector field identities") {
    Rng rng(3);
    const auto p = two_block(1000, 3, 0.05);
    for (int i = 0; i < 2000; ++i) {
        const FluidState x = random_state(p, rng);
        const auto f = vector_field(x, p);
        const auto r = rates(x, p);
        const double mass = total(x.a);
        CHECK(total(f.du) == doctest::Approx(1.0).epsilon(1e-14));
        for (std::size_t l = 0; l < 2; ++l) {
            double expect = 0.0;
            for (std::size_t k = 0; k < 2; ++k) expect += x.a[k] / mass * r.mu(k, l);
            CHECK(std::abs(f.da[l] + f.db[l] + f.du[l] - expect) < 1e-12);
        }
    }
    SUBCASE("no contacts left") {
        const FluidState x{{0.1, 0.3}, {0, 0}, {1.0 / 3.0 - 0.1, 2.0 / 3.0 - 0.3}};
        const auto f = vector_field(x, p);
        CHECK(f.da[0] == doctest::Approx(-0.25));
        CHECK(f.da[1] == doctest::Approx(-0.75));
        CHECK(f.db[0] == doctest::Approx(0.0));
        CHECK(f.db[1] == doctest::Approx(0.0));
    }
    SUBCASE("depleted mass") {
        const FluidState x{{0, 0}, {0.1, 0.1}, {0.2, 0.2}};
        CHECK_THROWS_AS(vector_field(x, p), Error);
    }
}

TEST_CASE("integration with zero rates drains linearly") {
    auto p = two_block(1000, 3, 0.05);
    p.lambda = SquareMatrix(2, 0.0);
    for (double h : {1e-4, 1e-3}) {
        const auto path = integrate(initial_state(p), p, {h, kDefaultStopThreshold});
        CHECK(std::abs(find_t0(path) - 0.05) <= 2.0 * h);
    }
    CHECK(find_t0(integrate(initial_state(p, 0.0), p)) == 0.0);
}

TEST_CASE("stopping time against coupon cap") {
    const double expected[] = {0.18, 0.91, 0.94, 0.95, 0.95, 0.95};
    const double at_001[] = {0.18, 0.91, 0.94, 0.95, 0.95, 0.95};
    for (int c = 1; c <= 6; ++c) {
        const auto p = two_block(1000, c, 0.01);
        const double t0 = find_t0(integrate(initial_state(p), p));
        CAPTURE(c);
        CHECK(std::abs(t0 - at_001[c - 1]) <= 0.02);
        const auto q = two_block(1000, c, 0.05);
        const double t0_05 = find_t0(integrate(initial_state(q), q));
        MESSAGE("c=" << c << " t0(0.01)=" << t0 << " t0(0.05)=" << t0_05 << " table=" << expected[c - 1]);
        if (c >= 2) CHECK(std::abs(t0_05 - expected[c - 1]) <= 0.02);
    }
}

TEST_CASE("step halving leaves the stopping time unchanged") {
    for (double mass : {0.01, 0.05})
        for (int c = 1; c <= 6; ++c) {
            const auto p = two_block(1000, c, mass);
            const double coarse = find_t0(integrate(initial_state(p), p, {1e-4, 1e-8}));
            const double fine = find_t0(integrate(initial_state(p), p, {5e-5, 1e-8}));
            CAPTURE(c);
            CHECK(std::abs(coarse - fine) < 1e-6);
        }
}

TEST_CASE("path properties") {
    for (int c : {1, 3, 6}) {
        const auto p = two_block(1000, c, 0.01);
        const auto path = integrate(initial_state(p), p);
        const double t0 = path.t0;
        CHECK(path.grid.front() == 0.0);
        CHECK(path.grid.back() == 1.0);
        CHECK(std::is_sorted(path.grid.begin(), path.grid.end()));
        for (std::size_t i = 0; i < path.grid.size(); ++i) {
            const auto& x = path.states[i];
            CHECK(std::abs(total(x.u) - std::min(path.grid[i], t0)) < 1e-6);
            for (std::size_t l = 0; l < 2; ++l) {
                CHECK(x.a[l] + x.b[l] + x.u[l] <= p.pi[l] + 1e-6);
                CHECK(x.a[l] >= 0.0);
                CHECK(x.b[l] >= 0.0);
                if (i > 0) {
                    const auto& y = path.states[i - 1];
                    CHECK(x.u[l] >= y.u[l]);
                    CHECK(x.a[l] + x.b[l] + x.u[l] >= y.a[l] + y.b[l] + y.u[l] - 1e-12);
                }
            }
            if (path.grid[i] >= t0) CHECK(x == path.states.back());
        }
    }
    CHECK_THROWS_AS(integrate(initial_state(two_block()), two_block(), {0.0, 1e-8}), Error);
    CHECK_THROWS_AS(integrate(initial_state(two_block()), two_block(), {-1e-3, 1e-8}), Error);
}

TEST_CASE("sensitivity to the initial condition stays bounded") {
    const auto p = two_block(1000, 3, 0.05);
    const FluidState x0 = initial_state(p);
    FluidState y0 = x0;
    y0.a[0] += 1e-6;
    const auto px = integrate(x0, p);
    const auto py = integrate(y0, p);
    const double horizon = std::min(px.t0, py.t0) - 0.01;

    // Largest absolute row sum of a finite-difference Jacobian along the path.
    double lipschitz = 0.0;
    for (std::size_t i = 0; i < px.grid.size() && px.grid[i] <= horizon; i += 100) {
        const FluidState& x = px.states[i];
        const auto f0 = vector_field(x, p);
        std::vector<double> rows(6, 0.0);
        for (int comp = 0; comp < 3; ++comp)
            for (std::size_t l = 0; l < 2; ++l) {
                FluidState xe = x;
                const double eps = 1e-7;
                xe.component(comp)[l] += eps;
                const auto f1 = vector_field(xe, p);
                for (std::size_t j = 0; j < 2; ++j) {
                    rows[j] += std::abs(f1.da[j] - f0.da[j]) / eps;
                    rows[2 + j] += std::abs(f1.db[j] - f0.db[j]) / eps;
                    rows[4 + j] += std::abs(f1.du[j] - f0.du[j]) / eps;
                }
            }
        lipschitz = std::max(lipschitz, *std::max_element(rows.begin(), rows.end()));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < px.grid.size() && px.grid[i] <= horizon; ++i)
        for (int comp = 0; comp < 3; ++comp)
            for (std::size_t l = 0; l < 2; ++l)
                worst = std::max(worst, std::abs(px.states[i].component(comp)[l] - py.states[i].component(comp)[l]));
    MESSAGE("L=" << lipschitz << " max deviation=" << worst);
    CHECK(worst / 1e-6 <= 10.0 * std::exp(lipschitz));
}

TEST_CASE("interpolation") {
    const auto p = two_block(1000, 3, 0.05);
    const auto path = integrate(initial_state(p), p, {1e-3, 1e-8});
    const auto mid = path.at(0.0005);
    CHECK(mid.a[0] == doctest::Approx(0.5 * (path.states[0].a[0] + path.states[1].a[0])));
    CHECK(path.value(0.0, 0, 1) == path.states[0].a[1]);
    CHECK(path.at(2.0) == path.states.back());
}
