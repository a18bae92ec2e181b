#include "crs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crs {

void KahanSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    KahanSum total;
    for (double v : values) total.add(v);
    s.mean = total.value() / static_cast<double>(s.count);
    if (s.count > 1) {
        KahanSum sq;
        for (double v : values) sq.add((v - s.mean) * (v - s.mean));
        s.stddev = std::sqrt(sq.value() / static_cast<double>(s.count - 1));
        s.std_error = s.stddev / std::sqrt(static_cast<double>(s.count));
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.q05 = quantile_sorted(sorted, 0.05);
    s.median = quantile_sorted(sorted, 0.5);
    s.q95 = quantile_sorted(sorted, 0.95);
    return s;
}

double kolmogorov_survival(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 0.2) return 1.0;  // series converges poorly; the survival is 1 to double precision
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = std::exp(-2.0 * j * j * x * x);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<double> sx(x.begin(), x.end());
    std::vector<double> sy(y.begin(), y.end());
    std::sort(sx.begin(), sx.end());
    std::sort(sy.begin(), sy.end());
    const double nx = static_cast<double>(sx.size());
    const double ny = static_cast<double>(sy.size());

    // Step both ECDFs past every copy of the current value so ties are
    // compared only after they are fully counted.
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sx.size() && j < sy.size()) {
        const double v = std::min(sx[i], sy[j]);
        while (i < sx.size() && sx[i] == v) ++i;
        while (j < sy.size() && sy[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    const double ne = std::sqrt(nx * ny / (nx + ny));
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

}  // namespace crs
