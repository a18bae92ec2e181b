#pragma once

// CSV and SVG emitters. CSV follows RFC 4180 (CRLF is not used; fields are
// quoted only when they contain a comma, quote or newline), numbers use the
// shortest round-trip representation with '.' as decimal separator.

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "crs/analysis.hpp"
#include "crs/fluid.hpp"
#include "crs/simulator.hpp"

namespace crs {

std::string format_number(double v);
std::string format_number(std::int64_t v);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(&out) {}

    CsvWriter& field(std::string_view text);
    CsvWriter& field(double v) { return field(format_number(v)); }
    CsvWriter& field(std::int64_t v) { return field(format_number(v)); }
    CsvWriter& field(int v) { return field(format_number(static_cast<std::int64_t>(v))); }
    void end_row();
    void row(const std::vector<std::string>& fields);

private:
    std::ostream* out_;
    bool first_ = true;
};

std::string csv_escape(std::string_view text);

/// One-line description of the model parameters (used in headers).
std::string describe_params(const SbmParams& p);

/// step, t, a_1..a_m, b_1..b_m, u_1..u_m, then the same counts divided by N.
/// With `replicate` >= 0 a leading replicate column is added.
void write_trajectory_header(std::ostream& out, std::size_t m, bool with_replicate);
void write_trajectory_rows(std::ostream& out, const Trajectory& traj, long replicate = -1);

/// A leading "# key=value ..." line with t0, h, stop threshold and the
/// parameters, then columns t, a_1..a_m, b_1..b_m, u_1..u_m.
void write_fluid_csv(std::ostream& out, const FluidPath& path, const SbmParams& p);

/// Long format: experiment, replicate, scalar, value.
void write_long_report(std::ostream& out, std::string_view experiment, const EnsembleResult& result);

/// experiment, scalar, count, mean, stddev, std_error, min, q05, median, q95, max.
void write_summary_header(std::ostream& out);
void write_summary_rows(std::ostream& out, std::string_view experiment, const EnsembleResult& result);

/// N, ln_N, mean_d1, log_d1, std_error, replicates.
void write_convergence_csv(std::ostream& out, const std::vector<ConvergencePoint>& points);

/// c, t0.
void write_t0_table_csv(std::ostream& out, const std::vector<T0Row>& rows);

struct ChartSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Standalone SVG line chart.
void write_svg_chart(std::ostream& out, std::string_view title, std::string_view x_label,
                     const std::vector<ChartSeries>& series);

/// One series per (component, block) of a fluid path.
std::vector<ChartSeries> fluid_series(const FluidPath& path, std::size_t max_points = 2000);
/// One series per (component, block) of a renormalised trajectory.
std::vector<ChartSeries> trajectory_series(const Trajectory& traj, std::size_t max_points = 2000);

}  // namespace crs
