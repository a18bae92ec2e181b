#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "crs/sbm_model.hpp"

namespace crs::test {

// pi = (1/3, 2/3), lambda = [[2, 3], [3, 4]].
inline SbmParams two_block(std::int64_t n = 1000, int cap = 3, double seed_fraction = 0.01) {
    SbmParams p;
    p.n_population = n;
    p.pi = {1.0 / 3.0, 2.0 / 3.0};
    p.lambda = SquareMatrix{{2.0, 3.0}, {3.0, 4.0}};
    p.coupon_cap = cap;
    p.seed_fraction = seed_fraction;
    return p;
}

inline SbmParams zero_rates(std::int64_t n, std::size_t m, int cap, double seed_fraction) {
    SbmParams p;
    p.n_population = n;
    p.pi.assign(m, 1.0 / static_cast<double>(m));
    p.lambda = SquareMatrix(m, 0.0);
    p.coupon_cap = cap;
    p.seed_fraction = seed_fraction;
    return p;
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Upper alpha quantile of chi-square with k degrees of freedom (Wilson-Hilferty).
inline double chi_square_critical(int k, double z_alpha) {
    const double kk = static_cast<double>(k);
    const double t = 1.0 - 2.0 / (9.0 * kk) + z_alpha * std::sqrt(2.0 / (9.0 * kk));
    return kk * t * t * t;
}

}  // namespace crs::test
