#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "crs/fluid.hpp"
#include "crs/sbm_model.hpp"
#include "crs/simulator.hpp"

namespace crs {

enum class Mode { Simulate, Ode, Compare, Sweep, Tables };

std::string_view to_string(Mode mode) noexcept;

struct ExperimentConfig {
    std::string name;  // experiment id used in reports; defaults to the mode
    Mode mode = Mode::Ode;
    SbmParams model;
    int replicates = 100;
    std::uint64_t master_seed = 0;
    double ode_step = kDefaultOdeStep;
    double eps_stop = kDefaultStopThreshold;
    std::vector<double> probe_times;
    std::vector<int> c_list;
    std::vector<std::int64_t> n_list;
    std::string output_dir = "out";
    int threads = 1;
    bool explicit_graph = false;
    HiddenPool hidden_pool = HiddenPool::Literal;
    bool svg = true;
};

/// Parses and validates a JSON experiment description. Unknown keys are
/// rejected. Throws Error with ParseError (byte offset in the message) or
/// ValidationError (offending field first).
ExperimentConfig parse_config(std::string_view json_text);

/// Canonical JSON rendering of a (validated) config; defaults made explicit.
std::string canonical_json(const ExperimentConfig& cfg);

/// FNV-1a 64 of canonical_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace crs
