#include "crs/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

namespace crs {

using nlohmann::json;

std::string_view to_string(Mode mode) noexcept {
    switch (mode) {
        case Mode::Simulate: return "simulate";
        case Mode::Ode: return "ode";
        case Mode::Compare: return "compare";
        case Mode::Sweep: return "sweep";
        case Mode::Tables: return "tables";
    }
    return "unknown";
}

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& constraint) {
    throw Error(ErrorCode::ValidationError, field + ": " + constraint);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) invalid(where + key, "unknown key");
    }
}

const json& require_object(const json& j, const std::string& field) {
    if (!j.is_object()) invalid(field, "must be an object");
    return j;
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) invalid(field, "must be a number");
    return j.get<double>();
}

std::int64_t get_integer(const json& j, const std::string& field) {
    if (!j.is_number_integer()) invalid(field, "must be an integer");
    return j.get<std::int64_t>();
}

std::vector<double> get_number_list(const json& j, const std::string& field) {
    if (!j.is_array()) invalid(field, "must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

Mode parse_mode(const json& j) {
    if (!j.is_string()) invalid("mode", "must be a string");
    const auto s = j.get<std::string>();
    for (Mode m : {Mode::Simulate, Mode::Ode, Mode::Compare, Mode::Sweep, Mode::Tables})
        if (s == to_string(m)) return m;
    invalid("mode", "must be one of simulate, ode, compare, sweep, tables (got \"" + s + "\")");
}

std::string field_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonSimplexPi: return "model.pi";
        case ErrorCode::AsymmetricLambda:
        case ErrorCode::RateExceedsN: return "model.lambda";
        case ErrorCode::EmptySeeds: return "model.seed_fraction";
        default: return "model";
    }
}

void check_model(const SbmParams& p, const std::string& context) {
    const auto violations = check_params(p);
    if (violations.empty()) return;
    std::string msg;
    for (const auto& v : violations) {
        if (!msg.empty()) msg += "; ";
        msg += field_of(v.code) + ": " + v.message + context;
    }
    throw Error(ErrorCode::ValidationError, msg);
}

SbmParams parse_model(const json& j, bool population_required) {
    require_object(j, "model");
    reject_unknown(j, {"n_population", "n_blocks", "pi", "lambda", "coupon_cap", "seed_fraction"}, "model.");
    SbmParams p;
    if (!j.contains("pi")) invalid("model.pi", "required");
    p.pi = get_number_list(j.at("pi"), "model.pi");
    const std::size_t m = p.pi.size();
    if (j.contains("n_blocks") && get_integer(j.at("n_blocks"), "model.n_blocks") != static_cast<std::int64_t>(m))
        invalid("model.n_blocks", "must equal the length of model.pi");

    if (!j.contains("lambda")) invalid("model.lambda", "required");
    const json& lam = j.at("lambda");
    if (!lam.is_array() || lam.size() != m) invalid("model.lambda", "must be an m x m array of numbers");
    p.lambda = SquareMatrix(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto row = get_number_list(lam[k], "model.lambda[" + std::to_string(k) + "]");
        if (row.size() != m) invalid("model.lambda", "must be an m x m array of numbers");
        for (std::size_t l = 0; l < m; ++l) p.lambda(k, l) = row[l];
    }

    if (!j.contains("coupon_cap")) invalid("model.coupon_cap", "required");
    const auto cap = get_integer(j.at("coupon_cap"), "model.coupon_cap");
    if (cap < 1 || cap > 1000000) invalid("model.coupon_cap", "must be a positive integer");
    p.coupon_cap = static_cast<int>(cap);

    if (!j.contains("seed_fraction")) invalid("model.seed_fraction", "required");
    p.seed_fraction = get_number(j.at("seed_fraction"), "model.seed_fraction");

    if (j.contains("n_population")) {
        p.n_population = get_integer(j.at("n_population"), "model.n_population");
        if (p.n_population < 1) invalid("model.n_population", "must be a positive integer");
    } else if (population_required) {
        invalid("model.n_population", "required");
    }
    return p;
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, "at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    require_object(doc, "(document)");
    reject_unknown(doc,
                   {"name", "mode", "model", "replicates", "master_seed", "ode_step", "eps_stop", "probe_times",
                    "c_list", "n_list", "output_dir", "threads", "explicit_graph", "hidden_pool", "svg"},
                   "");

    ExperimentConfig cfg;
    if (!doc.contains("mode")) invalid("mode", "required");
    cfg.mode = parse_mode(doc.at("mode"));
    cfg.name = std::string(to_string(cfg.mode));
    if (doc.contains("name")) {
        if (!doc.at("name").is_string() || doc.at("name").get<std::string>().empty())
            invalid("name", "must be a non-empty string");
        cfg.name = doc.at("name").get<std::string>();
    }
    if (!doc.contains("model")) invalid("model", "required");

    if (doc.contains("n_list")) {
        const json& nl = doc.at("n_list");
        if (!nl.is_array()) invalid("n_list", "must be an array of integers");
        for (std::size_t i = 0; i < nl.size(); ++i) {
            const auto n = get_integer(nl[i], "n_list[" + std::to_string(i) + "]");
            if (n < 1) invalid("n_list[" + std::to_string(i) + "]", "must be positive");
            cfg.n_list.push_back(n);
        }
    }
    if (cfg.mode == Mode::Sweep && cfg.n_list.empty()) invalid("n_list", "required and non-empty for mode sweep");

    cfg.model = parse_model(doc.at("model"), cfg.mode != Mode::Sweep);
    const bool population_from_list = cfg.model.n_population == 0;
    if (population_from_list) cfg.model.n_population = cfg.n_list.front();

    if (doc.contains("replicates")) {
        const auto r = get_integer(doc.at("replicates"), "replicates");
        if (r < 1 || r > 100000000) invalid("replicates", "must be a positive integer");
        cfg.replicates = static_cast<int>(r);
    }
    if (doc.contains("master_seed")) {
        const json& s = doc.at("master_seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
            invalid("master_seed", "must be an unsigned 64-bit integer");
        cfg.master_seed = s.get<std::uint64_t>();
    }
    if (doc.contains("ode_step")) {
        cfg.ode_step = get_number(doc.at("ode_step"), "ode_step");
        if (!(cfg.ode_step > 0.0 && cfg.ode_step <= 1.0)) invalid("ode_step", "must lie in (0, 1]");
    }
    if (doc.contains("eps_stop")) {
        cfg.eps_stop = get_number(doc.at("eps_stop"), "eps_stop");
        if (!(cfg.eps_stop > 0.0 && cfg.eps_stop < 1.0)) invalid("eps_stop", "must lie in (0, 1)");
    }
    if (doc.contains("probe_times")) {
        cfg.probe_times = get_number_list(doc.at("probe_times"), "probe_times");
        for (double t : cfg.probe_times)
            if (!(t >= 0.0 && t <= 1.0)) invalid("probe_times", "every probe time must lie in [0, 1]");
    }
    if (doc.contains("c_list")) {
        const json& cl = doc.at("c_list");
        if (!cl.is_array()) invalid("c_list", "must be an array of integers");
        for (std::size_t i = 0; i < cl.size(); ++i) {
            const auto c = get_integer(cl[i], "c_list[" + std::to_string(i) + "]");
            if (c < 1 || c > 1000000) invalid("c_list[" + std::to_string(i) + "]", "must be a positive integer");
            cfg.c_list.push_back(static_cast<int>(c));
        }
    }
    if (cfg.mode == Mode::Tables && cfg.c_list.empty()) invalid("c_list", "required and non-empty for mode tables");
    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string() || doc.at("output_dir").get<std::string>().empty())
            invalid("output_dir", "must be a non-empty string");
        cfg.output_dir = doc.at("output_dir").get<std::string>();
    }
    if (doc.contains("threads")) {
        const auto t = get_integer(doc.at("threads"), "threads");
        if (t < 1 || t > 1024) invalid("threads", "must lie in [1, 1024]");
        cfg.threads = static_cast<int>(t);
    }
    for (const char* key : {"explicit_graph", "svg"}) {
        if (!doc.contains(key)) continue;
        if (!doc.at(key).is_boolean()) invalid(key, "must be a boolean");
        (std::string_view(key) == "svg" ? cfg.svg : cfg.explicit_graph) = doc.at(key).get<bool>();
    }
    if (doc.contains("hidden_pool")) {
        const json& hp = doc.at("hidden_pool");
        const std::string v = hp.is_string() ? hp.get<std::string>() : "";
        if (v == "literal") cfg.hidden_pool = HiddenPool::Literal;
        else if (v == "exact") cfg.hidden_pool = HiddenPool::Exact;
        else invalid("hidden_pool", "must be \"literal\" or \"exact\"");
    }
    if (cfg.explicit_graph && cfg.mode != Mode::Simulate && cfg.mode != Mode::Compare)
        invalid("explicit_graph", "only meaningful for modes simulate and compare");
    if (cfg.explicit_graph && cfg.model.n_population > kDefaultGraphCap)
        invalid("explicit_graph", "n_population exceeds the explicit-graph cap of " + std::to_string(kDefaultGraphCap));

    if (!population_from_list) check_model(cfg.model, "");
    for (auto n : cfg.n_list) {
        SbmParams p = cfg.model;
        p.n_population = n;
        check_model(p, " (for n_list entry " + std::to_string(n) + ")");
    }
    return cfg;
}

std::string canonical_json(const ExperimentConfig& cfg) {
    json model;
    model["n_population"] = cfg.model.n_population;
    model["n_blocks"] = cfg.model.n_blocks();
    model["pi"] = cfg.model.pi;
    json lam = json::array();
    for (std::size_t k = 0; k < cfg.model.n_blocks(); ++k) {
        json row = json::array();
        for (std::size_t l = 0; l < cfg.model.n_blocks(); ++l) row.push_back(cfg.model.lambda(k, l));
        lam.push_back(row);
    }
    model["lambda"] = lam;
    model["coupon_cap"] = cfg.model.coupon_cap;
    model["seed_fraction"] = cfg.model.seed_fraction;

    json doc;
    doc["name"] = cfg.name;
    doc["mode"] = std::string(to_string(cfg.mode));
    doc["model"] = model;
    doc["replicates"] = cfg.replicates;
    doc["master_seed"] = cfg.master_seed;
    doc["ode_step"] = cfg.ode_step;
    doc["eps_stop"] = cfg.eps_stop;
    doc["probe_times"] = cfg.probe_times;
    doc["c_list"] = cfg.c_list;
    doc["n_list"] = cfg.n_list;
    doc["output_dir"] = cfg.output_dir;
    doc["threads"] = cfg.threads;
    doc["explicit_graph"] = cfg.explicit_graph;
    doc["hidden_pool"] = cfg.hidden_pool == HiddenPool::Exact ? "exact" : "literal";
    doc["svg"] = cfg.svg;
    return doc.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
    // Thread count and output location do not change any output byte.
    ExperimentConfig c = cfg;
    c.threads = 1;
    c.output_dir.clear();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_json(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace crs
