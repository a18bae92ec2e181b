#pragma once

// Experiment dispatch: runs one configured mode, writes its CSV/SVG
// artifacts and a manifest.json into the output directory.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crs/config.hpp"

namespace crs {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> output_dir;
};

struct RunOutcome {
    int exit_code = kExitOk;
    std::string message;             // empty on success
    std::vector<std::string> files;  // written artifacts, relative to output_dir
    std::optional<double> t0;        // fluid-limit stopping time when computed
};

void apply_overrides(ExperimentConfig& cfg, const RunOverrides& overrides);

/// Runs a validated config. Never throws for module or I/O errors: they are
/// mapped onto the exit code and recorded in the manifest.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// Reads, parses and runs a config file. Config errors give exit code 2; the
/// manifest is still written when an output directory is known.
RunOutcome run_config_file(const std::string& path, const RunOverrides& overrides);

/// FNV-1a 64 of a byte string as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

std::string_view code_version() noexcept;

}  // namespace crs
