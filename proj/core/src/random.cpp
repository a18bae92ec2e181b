#include "crs/random.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crs {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng Rng::stream(std::uint64_t master, std::uint64_t index) {
    return Rng(splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
    // Largest multiple of bound representable; reject the tail.
    const std::uint64_t limit = max() - (max() % bound + 1) % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x > limit);
    return x % bound;
}

namespace {

// Inversion by sequential search from 0. Expected cost O(n*p + 1).
std::int64_t binomial_inversion(Rng& rng, std::int64_t n, double p) {
    const double q = 1.0 - p;
    const double s = p / q;
    const double a = (static_cast<double>(n) + 1.0) * s;
    for (;;) {
        double r = std::pow(q, static_cast<double>(n));
        double u = rng.uniform();
        std::int64_t x = 0;
        while (u > r) {
            u -= r;
            ++x;
            if (x > n) break;  // roundoff in the tail; redraw
            r *= a / static_cast<double>(x) - s;
        }
        if (x <= n) return x;
    }
}

// Stirling series remainder: ln k! - [(k+1/2) ln(k+1) - (k+1) + ln sqrt(2 pi)].
double stirling_correction(std::int64_t k) {
    static constexpr std::array<double, 10> table = {
        0.08106146679532726, 0.04134069595540929, 0.02767792568499834,
        0.02079067210376509, 0.01664469118982119, 0.01387612882307075,
        0.01189670994589177, 0.01041126526197209, 0.009255462182712733,
        0.008330563433362871};
    if (k < 10) return table[static_cast<std::size_t>(k)];
    const double kp1 = static_cast<double>(k) + 1.0;
    const double r = 1.0 / (kp1 * kp1);
    return (1.0 / 12.0 - (1.0 / 360.0 - r / 1260.0) * r) / kp1;
}

// Hormann (1993) BTRD: transformed rejection with decomposition. Requires
// p <= 1/2 and n*p >= 10.
std::int64_t binomial_btrd(Rng& rng, std::int64_t n, double p) {
    const double nd = static_cast<double>(n);
    const double spq = std::sqrt(nd * p * (1.0 - p));
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = nd * p + 0.5;
    const double vr = 0.92 - 4.2 / b;
    const double urvr = 0.86 * vr;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const auto m = static_cast<std::int64_t>(std::floor((nd + 1.0) * p));
    const double h = stirling_correction(m) + stirling_correction(n - m);

    for (;;) {
        double v = rng.uniform_open();
        double u;
        if (v <= urvr) {
            u = v / vr - 0.43;
            return static_cast<std::int64_t>(std::floor((2.0 * a / (0.5 - std::abs(u)) + b) * u + c));
        }
        if (v >= vr) {
            u = rng.uniform_open() - 0.5;
        } else {
            u = v / vr - 0.93;
            u = std::copysign(0.5, u) - u;
            v = rng.uniform_open() * vr;
        }
        const double us = 0.5 - std::abs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + c);
        if (kd < 0.0 || kd > nd) continue;
        const auto k = static_cast<std::int64_t>(kd);
        v = v * alpha / (a / (us * us) + b);
        const auto km = std::abs(k - m);
        if (km <= 15) {
            // Recursive evaluation of f(k)/f(m).
            double f = 1.0;
            const double r = p / (1.0 - p);
            const double nr = (nd + 1.0) * r;
            if (m < k) {
                for (std::int64_t i = m + 1; i <= k; ++i) f *= nr / static_cast<double>(i) - r;
            } else if (m > k) {
                for (std::int64_t i = k + 1; i <= m; ++i) v *= nr / static_cast<double>(i) - r;
            }
            if (v <= f) return k;
            continue;
        }
        // Squeeze on log scale.
        v = std::log(v);
        const double kmd = static_cast<double>(km);
        const double npq = spq * spq;
        const double rho = (kmd / npq) * (((kmd / 3.0 + 0.625) * kmd + 1.0 / 6.0) / npq + 0.5);
        const double t = -kmd * kmd / (2.0 * npq);
        if (v < t - rho) return k;
        if (v > t + rho) continue;
        const double nm = nd - static_cast<double>(m) + 1.0;
        const double nk = nd - kd + 1.0;
        const double md = static_cast<double>(m);
        const double bound = (md + 0.5) * std::log((md + 1.0) / ((p / (1.0 - p)) * nm)) + h +
                             (nd + 1.0) * std::log(nm / nk) + (kd + 0.5) * std::log(nk * (p / (1.0 - p)) / (kd + 1.0)) -
                             stirling_correction(k) - stirling_correction(n - k);
        if (v <= bound) return k;
    }
}

}  // namespace

std::int64_t sample_binomial(Rng& rng, std::int64_t n, double p) {
    if (n < 0) throw std::invalid_argument("sample_binomial: n < 0");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_binomial: p outside [0,1]");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    if (p > 0.5) return n - sample_binomial(rng, n, 1.0 - p);
    if (static_cast<double>(n) * p < 10.0) return binomial_inversion(rng, n, p);
    return binomial_btrd(rng, n, p);
}

std::vector<std::int64_t> sample_multinomial(Rng& rng, std::int64_t n, std::span<const double> probs) {
    std::vector<std::int64_t> out(probs.size(), 0);
    if (probs.empty()) return out;
    double mass_left = std::accumulate(probs.begin(), probs.end(), 0.0);
    std::int64_t left = n;
    for (std::size_t i = 0; i + 1 < probs.size() && left > 0; ++i) {
        const double p = mass_left > 0.0 ? std::clamp(probs[i] / mass_left, 0.0, 1.0) : 0.0;
        out[i] = sample_binomial(rng, left, p);
        left -= out[i];
        mass_left -= probs[i];
    }
    out.back() += left;
    return out;
}

std::int64_t sample_hypergeometric(Rng& rng, std::int64_t draws, std::int64_t marked, std::int64_t total) {
    if (draws < 0 || marked < 0 || marked > total || draws > total)
        throw std::invalid_argument("sample_hypergeometric: invalid urn");
    // Draw ball by ball; exact and cheap for the small draw counts used here.
    std::int64_t hits = 0;
    std::int64_t remaining_marked = marked;
    std::int64_t remaining = total;
    for (std::int64_t i = 0; i < draws && remaining_marked > 0; ++i) {
        if (remaining_marked == remaining) {
            hits += draws - i;
            break;
        }
        if (rng.below(static_cast<std::uint64_t>(remaining)) < static_cast<std::uint64_t>(remaining_marked)) {
            ++hits;
            --remaining_marked;
        }
        --remaining;
    }
    return hits;
}

std::vector<std::int64_t> sample_multivariate_hypergeometric(Rng& rng, std::int64_t draws,
                                                             std::span<const std::int64_t> counts) {
    std::int64_t total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    if (draws < 0 || draws > total)
        throw std::invalid_argument("sample_multivariate_hypergeometric: draws exceed urn");
    std::vector<std::int64_t> out(counts.size(), 0);
    std::int64_t left = draws;
    for (std::size_t l = 0; l < counts.size() && left > 0; ++l) {
        out[l] = sample_hypergeometric(rng, left, counts[l], total);
        left -= out[l];
        total -= counts[l];
    }
    return out;
}

std::size_t sample_weighted_index(Rng& rng, std::span<const std::int64_t> weights) {
    const std::int64_t total = std::accumulate(weights.begin(), weights.end(), std::int64_t{0});
    if (total <= 0) throw std::invalid_argument("sample_weighted_index: no positive weight");
    auto x = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total)));
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (x < weights[l]) return l;
        x -= weights[l];
    }
    return weights.size() - 1;
}

}  // namespace crs
