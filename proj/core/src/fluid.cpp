#include "crs/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace crs {

double FluidState::active_mass() const {
    double s = 0.0;
    for (double v : a) s += std::max(v, 0.0);
    return s;
}

Rates rates(const FluidState& x, const SbmParams& p) {
    const std::size_t m = p.n_blocks();
    Rates r{SquareMatrix(m), std::vector<double>(m, 0.0), SquareMatrix(m)};
    for (std::size_t l = 0; l < m; ++l) {
        const double open = std::max(p.pi[l] - x.a[l] - x.u[l], 0.0);
        const double hidden = std::max(p.pi[l] - x.a[l] - x.b[l] - x.u[l], 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            r.lambda(k, l) = p.lambda(k, l) * open;
            r.mu(k, l) = p.lambda(k, l) * hidden;
        }
    }
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l) r.total[k] += r.lambda(k, l);
    return r;
}

double expected_coupons(double rate, int cap) {
    if (rate <= 0.0 || cap <= 0) return 0.0;
    const double c = static_cast<double>(cap);
    if (rate >= c) {
        // c - sum_{h<c} (c-h) P(Z = h); the subtracted sum is small here.
        double shortfall = 0.0;
        double pmf = std::exp(-rate);
        for (int h = 0; h < cap; ++h) {
            if (h > 0) pmf *= rate / static_cast<double>(h);
            shortfall += (c - h) * pmf;
        }
        return c - shortfall;
    }
    // rate * P(Z <= c-2) + c * P(Z >= c), upper tail summed directly so small
    // rates do not cancel.
    double pmf = std::exp(-rate);
    double head = 0.0;  // P(Z <= c-2)
    for (int h = 0; h < cap; ++h) {
        if (h > 0) pmf *= rate / static_cast<double>(h);
        if (h <= cap - 2) head += pmf;
    }
    double term = pmf * rate / c;  // P(Z = c)
    double tail = 0.0;
    for (int h = cap; term > 0.0; ++h) {
        tail += term;
        if (term < tail * 1e-18) break;
        term *= rate / static_cast<double>(h + 1);
    }
    return rate * head + c * tail;
}

namespace {

std::optional<FieldValue> field_or_depleted(const FluidState& x, const SbmParams& p, double stop_threshold) {
    const double mass = x.active_mass();
    if (!(mass > stop_threshold)) return std::nullopt;
    const std::size_t m = p.n_blocks();
    const Rates r = rates(x, p);
    std::vector<double> weight(m);
    for (std::size_t k = 0; k < m; ++k) weight[k] = std::max(x.a[k], 0.0) / mass;
    std::vector<double> coupon_scale(m, 0.0);
    for (std::size_t k = 0; k < m; ++k)
        if (r.total[k] > 0.0) coupon_scale[k] = expected_coupons(r.total[k], p.coupon_cap) / r.total[k];

    FieldValue f{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m)};
    for (std::size_t l = 0; l < m; ++l) {
        double coupons = 0.0;
        double named = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            coupons += weight[k] * r.lambda(k, l) * coupon_scale[k];
            named += weight[k] * r.mu(k, l);
        }
        f.da[l] = coupons - weight[l];
        f.db[l] = named - coupons;
        f.du[l] = weight[l];
    }
    return f;
}

FluidState axpy(const FluidState& x, double h, const FieldValue& f) {
    FluidState y = x;
    for (std::size_t l = 0; l < x.n_blocks(); ++l) {
        y.a[l] += h * f.da[l];
        y.b[l] += h * f.db[l];
        y.u[l] += h * f.du[l];
    }
    return y;
}

// One RK4 step; nullopt when a stage or the result has depleted active mass.
std::optional<FluidState> rk4(const FluidState& x, const SbmParams& p, double h, double stop_threshold) {
    auto k1 = field_or_depleted(x, p, stop_threshold);
    if (!k1) return std::nullopt;
    auto k2 = field_or_depleted(axpy(x, h / 2, *k1), p, stop_threshold);
    if (!k2) return std::nullopt;
    auto k3 = field_or_depleted(axpy(x, h / 2, *k2), p, stop_threshold);
    if (!k3) return std::nullopt;
    auto k4 = field_or_depleted(axpy(x, h, *k3), p, stop_threshold);
    if (!k4) return std::nullopt;
    FluidState y = x;
    for (std::size_t l = 0; l < x.n_blocks(); ++l) {
        y.a[l] += h / 6 * (k1->da[l] + 2 * k2->da[l] + 2 * k3->da[l] + k4->da[l]);
        y.b[l] += h / 6 * (k1->db[l] + 2 * k2->db[l] + 2 * k3->db[l] + k4->db[l]);
        y.u[l] += h / 6 * (k1->du[l] + 2 * k2->du[l] + 2 * k3->du[l] + k4->du[l]);
    }
    for (int c = 0; c < 3; ++c)
        for (double& v : y.component(c)) v = std::max(v, 0.0);
    if (!(y.active_mass() > stop_threshold)) return std::nullopt;
    return y;
}

}  // namespace

FieldValue vector_field(const FluidState& x, const SbmParams& p, double stop_threshold) {
    auto f = field_or_depleted(x, p, stop_threshold);
    if (!f) throw Error(ErrorCode::DepletedActiveMass, "active mass at or below the stop threshold");
    return *std::move(f);
}

FluidState initial_state(const SbmParams& p, double active_mass) {
    const std::size_t m = p.n_blocks();
    FluidState x{std::vector<double>(m), std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    for (std::size_t l = 0; l < m; ++l) x.a[l] = active_mass * p.pi[l];
    return x;
}

FluidState initial_state(const SbmParams& p) { return initial_state(p, p.seed_fraction); }

FluidPath integrate(const FluidState& x0, const SbmParams& p, IntegrateOptions opts) {
    if (!(opts.step > 0.0) || opts.step > 1.0 || !std::isfinite(opts.step))
        throw Error(ErrorCode::StepSizeInvalid, "ODE step must lie in (0, 1]");
    const double h = opts.step;
    const auto steps = static_cast<std::int64_t>(std::ceil(1.0 / h - 1e-9));

    FluidPath path;
    path.step = h;
    path.stop_threshold = opts.stop_threshold;
    path.grid.reserve(static_cast<std::size_t>(steps) + 2);
    path.states.reserve(static_cast<std::size_t>(steps) + 2);
    path.grid.push_back(0.0);
    path.states.push_back(x0);

    FluidState x = x0;
    bool frozen = !(x0.active_mass() > opts.stop_threshold);
    path.t0 = frozen ? 0.0 : 1.0;
    const double stiff_scale = 1.0 + static_cast<double>(p.coupon_cap);

    for (std::int64_t i = 1; i <= steps; ++i) {
        const double t_prev = static_cast<double>(i - 1) * h;
        const double t_next = i == steps ? 1.0 : static_cast<double>(i) * h;
        double t = t_prev;
        while (!frozen && t < t_next) {
            // The block mix a/|a| relaxes at a rate of order (1+c)/|a|, so
            // the step is capped at |a|/(1+c) once |a| is comparable to h.
            const double dt = std::min(t_next - t, std::max(x.active_mass() / stiff_scale, h * 0x1.0p-30));
            const bool last = dt >= t_next - t;
            if (auto y = rk4(x, p, dt, opts.stop_threshold)) {
                x = *std::move(y);
                t = last ? t_next : t + dt;
                continue;
            }
            // Crossing inside this sub-step: bisect on its length.
            double lo = 0.0, hi = dt;
            FluidState at_lo = x;
            const double resolution = h * 0x1.0p-20;
            while (hi - lo > resolution) {
                const double mid = 0.5 * (lo + hi);
                if (auto y = rk4(x, p, mid, opts.stop_threshold)) {
                    lo = mid;
                    at_lo = *std::move(y);
                } else {
                    hi = mid;
                }
            }
            x = std::move(at_lo);
            path.t0 = t + lo;
            frozen = true;
            if (path.t0 > path.grid.back() && path.t0 < t_next) {
                path.grid.push_back(path.t0);
                path.states.push_back(x);
            }
        }
        path.grid.push_back(t_next);
        path.states.push_back(x);
    }
    return path;
}

double find_t0(const FluidPath& path) { return path.t0; }

FluidState FluidPath::at(double t) const {
    t = std::clamp(t, 0.0, 1.0);
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    if (it == grid.begin()) return states.front();
    if (it == grid.end()) return states.back();
    const auto hi = static_cast<std::size_t>(it - grid.begin());
    const auto lo = hi - 1;
    const double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
    FluidState out = states[lo];
    for (int c = 0; c < 3; ++c) {
        auto& dst = out.component(c);
        const auto& right = states[hi].component(c);
        for (std::size_t l = 0; l < dst.size(); ++l) dst[l] += w * (right[l] - dst[l]);
    }
    return out;
}

double FluidPath::value(double t, int component, std::size_t l) const {
    t = std::clamp(t, 0.0, 1.0);
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    if (it == grid.begin()) return states.front().component(component)[l];
    if (it == grid.end()) return states.back().component(component)[l];
    const auto hi = static_cast<std::size_t>(it - grid.begin());
    const auto lo = hi - 1;
    const double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
    const double left = states[lo].component(component)[l];
    return left + w * (states[hi].component(component)[l] - left);
}

}  // namespace crs
