#pragma once

// Deterministic fluid limit of the renormalised chain-referral process.

#include <vector>

#include "crs/sbm_model.hpp"

namespace crs {

struct FluidState {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> u;

    std::size_t n_blocks() const noexcept { return a.size(); }
    double active_mass() const;

    /// Component i (0 = a, 1 = b, 2 = u).
    const std::vector<double>& component(int i) const { return i == 0 ? a : (i == 1 ? b : u); }
    std::vector<double>& component(int i) { return i == 0 ? a : (i == 1 ? b : u); }

    bool operator==(const FluidState&) const = default;
};

inline constexpr double kDefaultStopThreshold = 1e-8;
inline constexpr double kDefaultOdeStep = 1e-4;

/// lambda^{k,l}, Lambda^k and mu^{k,l} at a fluid state (row k = interviewee
/// block, column l = contact block).
struct Rates {
    SquareMatrix lambda;
    std::vector<double> total;
    SquareMatrix mu;
};

Rates rates(const FluidState& x, const SbmParams& p);

/// E[min(Z, c)] for Z ~ Poisson(rate), i.e. c - sum_{h<=c} (c-h) P(Z = h).
double expected_coupons(double rate, int cap);

struct FieldValue {
    std::vector<double> da;
    std::vector<double> db;
    std::vector<double> du;
};

/// Right-hand side of the fluid ODE. Throws DepletedActiveMass when
/// sum(a) <= stop_threshold.
FieldValue vector_field(const FluidState& x, const SbmParams& p, double stop_threshold = kDefaultStopThreshold);

struct FluidPath {
    std::vector<double> grid;
    std::vector<FluidState> states;
    double t0 = 1.0;
    double step = kDefaultOdeStep;
    double stop_threshold = kDefaultStopThreshold;

    /// Linear interpolation between grid nodes; t clamped to [0, 1].
    FluidState at(double t) const;
    double value(double t, int component, std::size_t l) const;
};

struct IntegrateOptions {
    double step = kDefaultOdeStep;
    double stop_threshold = kDefaultStopThreshold;
};

/// Default starting point (a0 = seed_fraction * pi, b0 = u0 = 0).
FluidState initial_state(const SbmParams& p);
FluidState initial_state(const SbmParams& p, double active_mass);

/// Fixed-step RK4 on [0, 1]. The first crossing of sum(a) = stop_threshold is
/// located by bisection within the step (to step * 2^-20) and inserted as a
/// grid node; the state is held constant afterwards.
FluidPath integrate(const FluidState& x0, const SbmParams& p, IntegrateOptions opts = {});

/// Recorded crossing time, 1 when sum(a) never reached the threshold.
double find_t0(const FluidPath& path);

}  // namespace crs
