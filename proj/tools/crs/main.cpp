// crs: run a chain-referral sampling experiment described by a JSON config.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crs/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Chain-referral sampling on stochastic block models: simulation, fluid limit, reports"};
    app.set_version_flag("--version", std::string(crs::code_version()));

    std::string config_path;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir;
    bool quiet = false;
    app.add_option("--config", config_path, "experiment description (JSON)")->required()->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads for replicate fan-out")->check(CLI::Range(1, 1024));
    auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_flag("-q,--quiet", quiet, "print nothing on success");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : crs::kExitConfigError;
    }

    crs::RunOverrides overrides;
    if (*seed_opt) overrides.seed = seed;
    if (*threads_opt) overrides.threads = threads;
    if (*out_opt) overrides.output_dir = out_dir;

    const crs::RunOutcome outcome = crs::run_config_file(config_path, overrides);
    if (outcome.exit_code != crs::kExitOk) {
        std::cerr << "crs: " << outcome.message << '\n';
        return outcome.exit_code;
    }
    if (!quiet) {
        for (const auto& f : outcome.files) std::cout << f << '\n';
        if (outcome.t0) std::cout << "t0 = " << *outcome.t0 << '\n';
    }
    return crs::kExitOk;
}
