#include "crs/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>

namespace crs {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // folds -0
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string format_number(std::int64_t v) {
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string csv_escape(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

CsvWriter& CsvWriter::field(std::string_view text) {
    if (!first_) *out_ << ',';
    *out_ << csv_escape(text);
    first_ = false;
    return *this;
}

void CsvWriter::end_row() {
    *out_ << '\n';
    first_ = true;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (const auto& f : fields) field(f);
    end_row();
}

std::string describe_params(const SbmParams& p) {
    std::string s = "N=" + format_number(p.n_population) + " m=" + format_number(static_cast<std::int64_t>(p.n_blocks()));
    s += " pi=";
    for (std::size_t l = 0; l < p.pi.size(); ++l) s += (l ? ";" : "") + format_number(p.pi[l]);
    s += " lambda=";
    for (std::size_t k = 0; k < p.n_blocks(); ++k) {
        if (k) s += "|";
        for (std::size_t l = 0; l < p.n_blocks(); ++l) s += (l ? ";" : "") + format_number(p.lambda(k, l));
    }
    s += " c=" + format_number(static_cast<std::int64_t>(p.coupon_cap));
    s += " seed_fraction=" + format_number(p.seed_fraction);
    return s;
}

namespace {

void block_columns(CsvWriter& w, std::size_t m, std::string_view suffix) {
    for (const char* name : {"a", "b", "u"})
        for (std::size_t l = 1; l <= m; ++l) w.field(std::string(name) + "_" + std::to_string(l) + std::string(suffix));
}

}  // namespace

void write_trajectory_header(std::ostream& out, std::size_t m, bool with_replicate) {
    CsvWriter w(out);
    if (with_replicate) w.field("replicate");
    w.field("step").field("t");
    block_columns(w, m, "");
    block_columns(w, m, "_norm");
    w.end_row();
}

void write_trajectory_rows(std::ostream& out, const Trajectory& traj, long replicate) {
    CsvWriter w(out);
    const std::int64_t n = traj.n_population();
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::int64_t step = 0; step <= n; ++step) {
        if (replicate >= 0) w.field(static_cast<std::int64_t>(replicate));
        w.field(step).field(static_cast<double>(step) * inv_n);
        for (int c = 0; c < 3; ++c)
            for (auto v : traj.counts(step, c)) w.field(v);
        for (int c = 0; c < 3; ++c)
            for (auto v : traj.counts(step, c)) w.field(static_cast<double>(v) * inv_n);
        w.end_row();
    }
}

void write_fluid_csv(std::ostream& out, const FluidPath& path, const SbmParams& p) {
    out << "# t0=" << format_number(path.t0) << " h=" << format_number(path.step)
        << " eps_stop=" << format_number(path.stop_threshold) << ' ' << describe_params(p) << '\n';
    CsvWriter w(out);
    const std::size_t m = p.n_blocks();
    w.field("t");
    block_columns(w, m, "");
    w.end_row();
    for (std::size_t i = 0; i < path.grid.size(); ++i) {
        w.field(path.grid[i]);
        for (int c = 0; c < 3; ++c)
            for (double v : path.states[i].component(c)) w.field(v);
        w.end_row();
    }
}

void write_long_report(std::ostream& out, std::string_view experiment, const EnsembleResult& result) {
    CsvWriter w(out);
    w.row({"experiment", "replicate", "scalar", "value"});
    for (std::size_t i = 0; i < static_cast<std::size_t>(result.replicate_count); ++i) {
        for (const auto& s : result.scalars) {
            w.field(experiment).field(static_cast<std::int64_t>(i)).field(s.name).field(s.values[i]);
            w.end_row();
        }
    }
}

void write_summary_header(std::ostream& out) {
    CsvWriter(out).row(
        {"experiment", "scalar", "count", "mean", "stddev", "std_error", "min", "q05", "median", "q95", "max"});
}

void write_summary_rows(std::ostream& out, std::string_view experiment, const EnsembleResult& result) {
    CsvWriter w(out);
    for (const auto& s : result.scalars) {
        const auto& m = s.summary;
        w.field(experiment).field(s.name).field(static_cast<std::int64_t>(m.count));
        w.field(m.mean).field(m.stddev).field(m.std_error).field(m.min).field(m.q05).field(m.median).field(m.q95).field(m.max);
        w.end_row();
    }
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergencePoint>& points) {
    CsvWriter w(out);
    w.row({"N", "ln_N", "mean_d1", "log_d1", "std_error", "replicates"});
    for (const auto& p : points) {
        w.field(p.n_population).field(std::log(static_cast<double>(p.n_population)));
        w.field(p.mean_d1).field(p.log_d1).field(p.std_error).field(p.replicate_count);
        w.end_row();
    }
}

void write_t0_table_csv(std::ostream& out, const std::vector<T0Row>& rows) {
    CsvWriter w(out);
    w.row({"c", "t0"});
    for (const auto& r : rows) {
        w.field(r.coupon_cap).field(r.t0);
        w.end_row();
    }
}

namespace {

std::string xml_escape(std::string_view text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

void write_svg_chart(std::ostream& out, std::string_view title, std::string_view x_label,
                     const std::vector<ChartSeries>& series) {
    constexpr double width = 800, height = 500, left = 70, right = 170, top = 40, bottom = 50;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = 0.0, ymax = -std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
        for (double v : s.y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
    }
    if (!(xmax > xmin)) xmin = 0.0, xmax = 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    const double pw = width - left - right, ph = height - top - bottom;
    auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double v) { return top + ph - (v - ymin) / (ymax - ymin) * ph; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
        << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 5.0;
        const double yv = ymin + (ymax - ymin) * i / 5.0;
        out << "<text x=\"" << sx(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
            << format_number(std::round(xv * 1000) / 1000) << "</text>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
            << format_number(std::round(yv * 1000) / 1000) << "</text>\n";
        out << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << sy(yv) << "\" y2=\"" << sy(yv)
            << "\" stroke=\"#ddd\"/>\n";
    }
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
        << xml_escape(x_label) << "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* colour = kPalette[i % kPalette.size()];
        const char* dash = i / kPalette.size() % 2 ? " stroke-dasharray=\"5,3\"" : "";
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"" << dash << " points=\"";
        for (std::size_t j = 0; j < s.x.size(); ++j) out << (j ? " " : "") << sx(s.x[j]) << ',' << sy(s.y[j]);
        out << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(i);
        out << "<line x1=\"" << left + pw + 12 << "\" x2=\"" << left + pw + 36 << "\" y1=\"" << ly - 4 << "\" y2=\""
            << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"" << dash << "/>\n";
        out << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly << "\">" << xml_escape(s.label) << "</text>\n";
    }
    out << "</svg>\n";
}

namespace {

std::vector<ChartSeries> empty_series(std::size_t m) {
    std::vector<ChartSeries> out;
    for (const char* name : {"a", "b", "u"})
        for (std::size_t l = 1; l <= m; ++l) out.push_back({std::string(name) + "_" + std::to_string(l), {}, {}});
    return out;
}

}  // namespace

std::vector<ChartSeries> fluid_series(const FluidPath& path, std::size_t max_points) {
    const std::size_t m = path.states.front().n_blocks();
    auto out = empty_series(m);
    const std::size_t stride = std::max<std::size_t>(1, path.grid.size() / std::max<std::size_t>(max_points, 1));
    for (std::size_t i = 0; i < path.grid.size(); i += stride) {
        for (int c = 0; c < 3; ++c)
            for (std::size_t l = 0; l < m; ++l) {
                auto& s = out[static_cast<std::size_t>(c) * m + l];
                s.x.push_back(path.grid[i]);
                s.y.push_back(path.states[i].component(c)[l]);
            }
    }
    return out;
}

std::vector<ChartSeries> trajectory_series(const Trajectory& traj, std::size_t max_points) {
    const std::size_t m = traj.n_blocks();
    auto out = empty_series(m);
    const auto n = traj.n_population();
    const auto stride = std::max<std::int64_t>(1, n / static_cast<std::int64_t>(std::max<std::size_t>(max_points, 1)));
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::int64_t step = 0; step <= n; step += stride) {
        for (int c = 0; c < 3; ++c) {
            const auto counts = traj.counts(step, c);
            for (std::size_t l = 0; l < m; ++l) {
                auto& s = out[static_cast<std::size_t>(c) * m + l];
                s.x.push_back(static_cast<double>(step) * inv_n);
                s.y.push_back(static_cast<double>(counts[l]) * inv_n);
            }
        }
    }
    return out;
}

}  // namespace crs
