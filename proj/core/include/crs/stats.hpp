#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace crs {

/// Neumaier-compensated running sum.
class KahanSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n - 1)
    double std_error = 0.0;
    double min = 0.0;
    double q05 = 0.0;
    double median = 0.0;
    double q95 = 0.0;
    double max = 0.0;
};

/// Linear-interpolation quantile (type 7) of a sorted sample.
double quantile_sorted(std::span<const double> sorted, double q);

Summary summarize(std::span<const double> values);

struct KsResult {
    double statistic = 0.0;  // sup |F_x - F_y|
    double p_value = 1.0;
};

/// Q_KS(x) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2).
double kolmogorov_survival(double x);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// (Stephens' small-sample correction on the effective size).
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);

}  // namespace crs
