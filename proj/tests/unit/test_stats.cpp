#include <doctest.h>

#include <cmath>
#include <vector>

#include "crs/random.hpp"
#include "crs/stats.hpp"

using namespace crs;

TEST_CASE("compensated sum") {
    KahanSum s;
    s.add(1.0);
    for (int i = 0; i < 1000; ++i) s.add(1e-16);
    s.add(-1.0);
    CHECK(s.value() == doctest::Approx(1e-13).epsilon(1e-6));
}

TEST_CASE("type-7 quantiles and summary") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    CHECK(quantile_sorted(v, 0.0) == 1.0);
    CHECK(quantile_sorted(v, 0.5) == 3.0);
    CHECK(quantile_sorted(v, 0.05) == doctest::Approx(1.2));
    CHECK(quantile_sorted(v, 1.0) == 5.0);
    const Summary s = summarize(std::vector<double>{4, 1, 3, 2, 5});
    CHECK(s.count == 5);
    CHECK(s.mean == 3.0);
    CHECK(s.stddev == doctest::Approx(std::sqrt(2.5)));
    CHECK(s.std_error == doctest::Approx(std::sqrt(2.5 / 5)));
    CHECK(s.min == 1.0);
    CHECK(s.median == 3.0);
    CHECK(s.max == 5.0);
    const Summary one = summarize(std::vector<double>{0.25});
    CHECK(one.mean == 0.25);
    CHECK(one.stddev == 0.0);
    CHECK(one.q05 == 0.25);
}

TEST_CASE("kolmogorov survival function") {
    CHECK(kolmogorov_survival(0.0) == 1.0);
    CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.0505).epsilon(0.02));
    CHECK(kolmogorov_survival(1.63) == doctest::Approx(0.0098).epsilon(0.03));
    CHECK(kolmogorov_survival(5.0) < 1e-20);
}

TEST_CASE("two-sample KS") {
    const std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7, 8};
    const auto same = ks_two_sample(a, a);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);
    const auto apart = ks_two_sample(a, b);
    CHECK(apart.statistic == 1.0);
    CHECK(apart.p_value < 0.05);
    // ties across samples
    const std::vector<double> c{1, 1, 2, 2}, d{1, 2, 2, 2};
    CHECK(ks_two_sample(c, d).statistic == doctest::Approx(0.25));

    Rng rng(3);
    std::vector<double> x, y;
    for (int i = 0; i < 2000; ++i) x.push_back(rng.uniform()), y.push_back(rng.uniform());
    CHECK(ks_two_sample(x, y).p_value > 0.01);
    for (auto& v : y) v += 0.1;
    CHECK(ks_two_sample(x, y).p_value < 1e-6);
}
