#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crs/experiment.hpp"
#include "crs/report.hpp"

using namespace crs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(CRS_TEST_SCRATCH) / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ExperimentConfig config(const std::string& mode, const std::string& extra, const fs::path& out) {
    auto cfg = parse_config(R"({"mode": ")" + mode + R"(", "model": {"n_population": 400,
        "pi": [0.3333333333333333, 0.6666666666666667], "lambda": [[2, 3], [3, 4]], "coupon_cap": 3,
        "seed_fraction": 0.02})" + extra + "}");
    cfg.output_dir = out.string();
    return cfg;
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

}  // namespace

TEST_CASE("csv formatting") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(std::int64_t{42}) == "42");
    std::ostringstream os;
    CsvWriter w(os);
    w.field("x").field(1.5).field(3);
    w.end_row();
    CHECK(os.str() == "x,1.5,3\n");
}

TEST_CASE("ode mode writes the fluid path and t0") {
    const auto dir = scratch("ode");
    const auto out = run_experiment(config("ode", "", dir));
    REQUIRE(out.exit_code == kExitOk);
    CHECK(fs::exists(dir / "fluid_path.csv"));
    CHECK(fs::exists(dir / "fluid_path.svg"));
    const auto m = manifest(dir);
    CHECK(m["status"] == "ok");
    CHECK(m["t0"].get<double>() == doctest::Approx(0.9477).epsilon(0.01));
    CHECK(m["code_version"] == std::string(code_version()));
    CHECK(m["config_hash"].get<std::string>().size() == 16);
    const std::string csv = slurp(dir / "fluid_path.csv");
    CHECK(csv.rfind("# t0=", 0) == 0);
    CHECK(csv.find("\nt,a_1,a_2,b_1,b_2,u_1,u_2\n") != std::string::npos);
}

TEST_CASE("tables mode emits the t0 table") {
    const auto dir = scratch("tables");
    const auto out = run_experiment(config("tables", R"(, "c_list": [1, 2, 3, 4, 5, 6], "svg": false)", dir));
    REQUIRE(out.exit_code == kExitOk);
    std::istringstream csv(slurp(dir / "t0_vs_c.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "c,t0");
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 6);
    CHECK_FALSE(fs::exists(dir / "active_mass.svg"));
}

TEST_CASE("runs are reproducible byte for byte") {
    for (const char* mode : {"simulate", "compare"}) {
        const auto d1 = scratch(std::string(mode) + "_1");
        const auto d2 = scratch(std::string(mode) + "_2");
        const std::string extra = R"(, "replicates": 6, "probe_times": [0.1, 0.3], "master_seed": 9)";
        auto c1 = config(mode, extra, d1);
        auto c2 = config(mode, extra, d2);
        c2.threads = 3;
        REQUIRE(run_experiment(c1).exit_code == kExitOk);
        REQUIRE(run_experiment(c2).exit_code == kExitOk);
        for (const auto& entry : fs::directory_iterator(d1)) {
            CAPTURE(entry.path());
            CHECK(slurp(entry.path()) == slurp(d2 / entry.path().filename()));
        }
        auto c3 = config(mode, R"(, "replicates": 6, "probe_times": [0.1, 0.3], "master_seed": 10)", scratch("other"));
        run_experiment(c3);
        CHECK(slurp(fs::path(c3.output_dir) / "summary.csv") != slurp(d1 / "summary.csv"));
    }
}

TEST_CASE("simulate mode exports trajectories and reports") {
    const auto dir = scratch("simulate");
    const auto out = run_experiment(config("simulate", R"(, "replicates": 3, "explicit_graph": true)", dir));
    REQUIRE(out.exit_code == kExitOk);
    std::istringstream csv(slurp(dir / "trajectories.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header.rfind("replicate,step,t,a_1,a_2,b_1,b_2,u_1,u_2", 0) == 0);
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    CHECK(rows == 3 * 401);
    CHECK(slurp(dir / "summary.csv").rfind("experiment,scalar,count,mean", 0) == 0);
    CHECK(slurp(dir / "report_long.csv").rfind("experiment,replicate,scalar,value", 0) == 0);
}

TEST_CASE("sweep mode emits both abscissae") {
    const auto dir = scratch("sweep");
    auto cfg = config("sweep", R"(, "n_list": [300, 600], "replicates": 4)", dir);
    REQUIRE(run_experiment(cfg).exit_code == kExitOk);
    const std::string csv = slurp(dir / "convergence.csv");
    CHECK(csv.rfind("N,ln_N,mean_d1,log_d1", 0) == 0);
}

TEST_CASE("failures still leave a manifest") {
    SUBCASE("unwritable output directory") {
        const auto base = scratch("blocked");
        fs::create_directories(base);
        std::ofstream(base / "file") << "x";
        auto cfg = config("ode", "", base / "file" / "sub");
        const auto out = run_experiment(cfg);
        CHECK(out.exit_code == kExitRuntimeError);
        CHECK(out.message.find("IoError") != std::string::npos);
    }
    SUBCASE("runtime error from a module") {
        const auto dir = scratch("seeds");
        auto cfg = config("simulate", R"(, "replicates": 2)", dir);
        cfg.model.seed_fraction = 0.0001;  // bypasses parse-time validation
        const auto out = run_experiment(cfg);
        CHECK(out.exit_code != kExitOk);
        const auto m = manifest(dir);
        CHECK(m["status"] == "failed");
        CHECK(m["error"].get<std::string>().find("EmptySeeds") != std::string::npos);
    }
    SUBCASE("bad config file") {
        const auto dir = scratch("badcfg");
        fs::create_directories(dir);
        std::ofstream(dir / "cfg.json") << R"({"mode": "ode", "model": {"pi": [0.5]}})";
        RunOverrides o;
        o.output_dir = (dir / "out").string();
        const auto out = run_config_file((dir / "cfg.json").string(), o);
        CHECK(out.exit_code == kExitConfigError);
        const auto m = manifest(dir / "out");
        CHECK(m["status"] == "failed");
        CHECK(m["exit_code"] == kExitConfigError);
    }
    SUBCASE("missing config file") {
        const auto out = run_config_file("/nonexistent/cfg.json", {});
        CHECK(out.exit_code == kExitConfigError);
    }
}

TEST_CASE("overrides") {
    auto cfg = config("ode", "", scratch("ov"));
    RunOverrides o;
    o.seed = 123;
    o.threads = 2;
    o.output_dir = "somewhere";
    apply_overrides(cfg, o);
    CHECK(cfg.master_seed == 123);
    CHECK(cfg.threads == 2);
    CHECK(cfg.output_dir == "somewhere");
    o.threads = 0;
    CHECK_THROWS_AS(apply_overrides(cfg, o), Error);
}
