#include "crs/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crs/analysis.hpp"
#include "crs/report.hpp"

#ifndef CRS_VERSION
#define CRS_VERSION "0.0.0"
#endif

namespace crs {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view code_version() noexcept { return CRS_VERSION; }

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void apply_overrides(ExperimentConfig& cfg, const RunOverrides& overrides) {
    if (overrides.seed) cfg.master_seed = *overrides.seed;
    if (overrides.threads) {
        if (*overrides.threads < 1) throw Error(ErrorCode::ValidationError, "threads: must be >= 1");
        cfg.threads = *overrides.threads;
    }
    if (overrides.output_dir) {
        if (overrides.output_dir->empty()) throw Error(ErrorCode::ValidationError, "output_dir: must be non-empty");
        cfg.output_dir = *overrides.output_dir;
    }
}

namespace {

// Artifacts are rendered in memory and written by a single writer.
class ArtifactWriter {
public:
    explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {}

    void prepare() {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_))
            throw Error(ErrorCode::IoError, "cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& content) {
        const fs::path target = dir_ / name;
        std::ofstream out(target, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot open " + target.string() + " for writing");
        out << content;
        out.close();
        if (!out) throw Error(ErrorCode::IoError, "failed writing " + target.string());
        files_.push_back({name, fnv1a_hex(content)});
    }

    struct Entry {
        std::string name;
        std::string hash;
    };
    const std::vector<Entry>& files() const { return files_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<Entry> files_;
};

IntegrateOptions ode_options(const ExperimentConfig& cfg) { return {cfg.ode_step, cfg.eps_stop}; }

double total(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

EnsembleConfig ensemble_config(const ExperimentConfig& cfg) {
    EnsembleConfig e;
    e.params = cfg.model;
    e.replicates = cfg.replicates;
    e.master_seed = cfg.master_seed;
    e.probe_times = cfg.probe_times;
    e.explicit_graph = cfg.explicit_graph;
    e.hidden_pool = cfg.hidden_pool;
    e.threads = cfg.threads;
    return e;
}

std::string svg(std::string_view title, std::string_view x_label, const std::vector<ChartSeries>& series) {
    std::ostringstream os;
    write_svg_chart(os, title, x_label, series);
    return os.str();
}

std::string ensemble_reports(ArtifactWriter& w, const ExperimentConfig& cfg, const EnsembleResult& result) {
    std::ostringstream longf, summary;
    write_long_report(longf, cfg.name, result);
    write_summary_header(summary);
    write_summary_rows(summary, cfg.name, result);
    w.write("report_long.csv", longf.str());
    w.write("summary.csv", summary.str());
    return summary.str();
}

void run_ode(ArtifactWriter& w, const ExperimentConfig& cfg, RunOutcome& outcome) {
    const FluidPath path = integrate(initial_state(cfg.model), cfg.model, ode_options(cfg));
    outcome.t0 = find_t0(path);
    std::ostringstream csv;
    write_fluid_csv(csv, path, cfg.model);
    w.write("fluid_path.csv", csv.str());
    if (cfg.svg) w.write("fluid_path.svg", svg("Fluid limit", "t", fluid_series(path)));
}

void run_simulate(ArtifactWriter& w, const ExperimentConfig& cfg) {
    const EnsembleConfig e = ensemble_config(cfg);
    std::ostringstream traj_csv;
    write_trajectory_header(traj_csv, cfg.model.n_blocks(), true);
    std::vector<ReplicateResult> results;
    std::string chart;
    for_each_replicate(e, [&](std::size_t i, const Trajectory& traj) {
        write_trajectory_rows(traj_csv, traj, static_cast<long>(i));
        results.push_back(measure_replicate(e, traj));
        if (i == 0 && cfg.svg) chart = svg("Chain-referral trajectory (replicate 0)", "t", trajectory_series(traj));
    });
    w.write("trajectories.csv", traj_csv.str());
    ensemble_reports(w, cfg, aggregate_replicates(e, std::move(results)));
    if (cfg.svg) w.write("trajectory.svg", chart);
}

void write_discovery_header(CsvWriter& c, bool with_cap) {
    if (with_cap) c.field("c");
    c.field("t").field("mean").field("stddev").field("std_error").field("q05").field("q95").field("fluid_prediction");
    c.end_row();
}

void write_discovery_row(CsvWriter& c, std::optional<int> cap, double t, const Summary& s, const FluidPath& fluid) {
    const FluidState x = fluid.at(t);
    if (cap) c.field(*cap);
    c.field(t).field(s.mean).field(s.stddev).field(s.std_error).field(s.q05).field(s.q95).field(total(x.a) + total(x.b));
    c.end_row();
}

void run_compare(ArtifactWriter& w, const ExperimentConfig& cfg, RunOutcome& outcome) {
    IntegrateOptions ode = ode_options(cfg);
    ode.step = std::min(ode.step, 0.25 / static_cast<double>(cfg.model.n_population));
    const FluidPath fluid = integrate(initial_state(cfg.model), cfg.model, ode);
    outcome.t0 = find_t0(fluid);

    EnsembleConfig e = ensemble_config(cfg);
    e.fluid = &fluid;
    const EnsembleResult result = ensemble_run(e);

    std::ostringstream fluid_csv;
    write_fluid_csv(fluid_csv, fluid, cfg.model);
    w.write("fluid_path.csv", fluid_csv.str());
    ensemble_reports(w, cfg, result);

    std::ostringstream stop;
    CsvWriter sc(stop);
    sc.field("stochastic_t0_mean").field("stochastic_t0_stddev").field("stochastic_t0_std_error").field("fluid_t0");
    sc.end_row();
    const auto& st = result.scalar("stop_time").summary;
    sc.field(st.mean).field(st.stddev).field(st.std_error).field(*outcome.t0);
    sc.end_row();
    w.write("stopping_time.csv", stop.str());

    if (!cfg.probe_times.empty()) {
        std::ostringstream disc;
        CsvWriter dc(disc);
        write_discovery_header(dc, false);
        for (double t : cfg.probe_times)
            write_discovery_row(dc, std::nullopt, t, result.scalar(discovery_scalar_name(t)).summary, fluid);
        w.write("discovery.csv", disc.str());
    }

    if (cfg.svg) {
        // Replicate 0 again (same stream), block totals against the fluid totals.
        EnsembleConfig one = e;
        one.replicates = 1;
        std::vector<ChartSeries> series;
        for_each_replicate(one, [&](std::size_t, const Trajectory& traj) {
            const auto per_block = trajectory_series(traj);
            const auto fluid_block = fluid_series(fluid);
            const std::size_t m = cfg.model.n_blocks();
            const char* names[] = {"|A|", "|B|", "|U|"};
            for (int comp = 0; comp < 3; ++comp) {
                for (const auto* src : {&per_block, &fluid_block}) {
                    ChartSeries s;
                    s.label = std::string(names[comp]) + (src == &per_block ? " chain" : " fluid");
                    s.x = (*src)[comp * m].x;
                    s.y.assign(s.x.size(), 0.0);
                    for (std::size_t l = 0; l < m; ++l)
                        for (std::size_t i = 0; i < s.y.size(); ++i) s.y[i] += (*src)[comp * m + l].y[i];
                    series.push_back(std::move(s));
                }
            }
        });
        w.write("compare.svg", svg("Chain (replicate 0) against the fluid limit", "t", series));
    }
}

void run_sweep(ArtifactWriter& w, const ExperimentConfig& cfg) {
    SweepConfig s;
    s.params = cfg.model;
    s.n_list = cfg.n_list;
    s.replicates = cfg.replicates;
    s.master_seed = cfg.master_seed;
    s.ode = ode_options(cfg);
    s.hidden_pool = cfg.hidden_pool;
    s.threads = cfg.threads;
    const auto points = convergence_sweep(s);
    std::ostringstream csv;
    write_convergence_csv(csv, points);
    w.write("convergence.csv", csv.str());
    if (cfg.svg) {
        ChartSeries series{"ln mean d1", {}, {}};
        for (const auto& p : points) {
            series.x.push_back(std::log(static_cast<double>(p.n_population)));
            series.y.push_back(p.log_d1);
        }
        w.write("convergence.svg", svg("Distance to the fluid limit", "ln N", {series}));
    }
}

void run_tables(ArtifactWriter& w, const ExperimentConfig& cfg) {
    const IntegrateOptions ode = ode_options(cfg);
    std::vector<T0Row> rows;
    std::vector<ChartSeries> active;
    std::ostringstream disc;
    CsvWriter dc(disc);
    write_discovery_header(dc, true);
    for (int c : cfg.c_list) {
        SbmParams p = cfg.model;
        p.coupon_cap = c;
        const FluidPath fluid = integrate(initial_state(p), p, ode);
        rows.push_back({c, find_t0(fluid)});

        ChartSeries s{"c=" + std::to_string(c), {}, {}};
        const std::size_t stride = std::max<std::size_t>(1, fluid.grid.size() / 2000);
        for (std::size_t i = 0; i < fluid.grid.size(); i += stride) {
            s.x.push_back(fluid.grid[i]);
            s.y.push_back(fluid.states[i].active_mass());
        }
        active.push_back(std::move(s));

        if (cfg.probe_times.empty()) continue;
        EnsembleConfig e = ensemble_config(cfg);
        e.params = p;
        e.master_seed = splitmix64(cfg.master_seed + static_cast<std::uint64_t>(c));
        const EnsembleResult result = ensemble_run(e);
        for (double t : cfg.probe_times)
            write_discovery_row(dc, c, t, result.scalar(discovery_scalar_name(t)).summary, fluid);
    }
    std::ostringstream csv;
    write_t0_table_csv(csv, rows);
    w.write("t0_vs_c.csv", csv.str());
    if (!cfg.probe_times.empty()) w.write("discovery_vs_c.csv", disc.str());
    if (cfg.svg) w.write("active_mass.svg", svg("Active coupon mass of the fluid limit", "t", active));
}

std::string manifest_json(const ExperimentConfig* cfg, const RunOutcome& outcome,
                          const std::vector<ArtifactWriter::Entry>& files) {
    json m;
    m["tool"] = "crs";
    m["code_version"] = std::string(code_version());
    if (cfg) {
        m["name"] = cfg->name;
        m["mode"] = std::string(to_string(cfg->mode));
        m["config_hash"] = config_hash(*cfg);
        m["master_seed"] = cfg->master_seed;
        m["config"] = json::parse(canonical_json(*cfg));
        m["config"].erase("threads");
        m["config"].erase("output_dir");
    } else {
        m["config_hash"] = nullptr;
        m["master_seed"] = nullptr;
    }
    m["status"] = outcome.exit_code == kExitOk ? "ok" : "failed";
    m["exit_code"] = outcome.exit_code;
    m["error"] = outcome.message.empty() ? json(nullptr) : json(outcome.message);
    json list = json::array();
    for (const auto& f : files) list.push_back({{"name", f.name}, {"fnv1a64", f.hash}});
    m["files"] = list;
    m["t0"] = outcome.t0 ? json(*outcome.t0) : json(nullptr);
    return m.dump(2) + "\n";
}

void write_manifest(const fs::path& dir, const std::string& text, RunOutcome& outcome) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (out) out << text;
    if (!out) {
        if (outcome.exit_code == kExitOk) outcome.exit_code = kExitRuntimeError;
        if (!outcome.message.empty()) outcome.message += "; ";
        outcome.message += "IoError: cannot write manifest.json in " + dir.string();
        return;
    }
    outcome.files.push_back("manifest.json");
}

int exit_code_for(ErrorCode code) {
    return code == ErrorCode::ParseError || code == ErrorCode::ValidationError ? kExitConfigError
                                                                              : kExitRuntimeError;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg) {
    RunOutcome outcome;
    ArtifactWriter writer(cfg.output_dir);
    try {
        writer.prepare();
        switch (cfg.mode) {
            case Mode::Ode: run_ode(writer, cfg, outcome); break;
            case Mode::Simulate: run_simulate(writer, cfg); break;
            case Mode::Compare: run_compare(writer, cfg, outcome); break;
            case Mode::Sweep: run_sweep(writer, cfg); break;
            case Mode::Tables: run_tables(writer, cfg); break;
        }
    } catch (const Error& e) {
        outcome.exit_code = exit_code_for(e.code());
        outcome.message = e.what();
    } catch (const std::exception& e) {
        outcome.exit_code = kExitRuntimeError;
        outcome.message = e.what();
    }
    for (const auto& f : writer.files()) outcome.files.push_back(f.name);
    write_manifest(writer.dir(), manifest_json(&cfg, outcome, writer.files()), outcome);
    return outcome;
}

RunOutcome run_config_file(const std::string& path, const RunOverrides& overrides) {
    RunOutcome outcome;
    ExperimentConfig cfg;
    try {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::ParseError, "cannot read config file " + path);
        std::ostringstream text;
        text << in.rdbuf();
        cfg = parse_config(text.str());
        apply_overrides(cfg, overrides);
    } catch (const Error& e) {
        outcome.exit_code = kExitConfigError;
        outcome.message = e.what();
        if (overrides.output_dir && !overrides.output_dir->empty())
            write_manifest(*overrides.output_dir, manifest_json(nullptr, outcome, {}), outcome);
        return outcome;
    }
    return run_experiment(cfg);
}

}  // namespace crs
