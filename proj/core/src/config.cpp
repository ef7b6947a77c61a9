#include "swqt/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace swqt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw std::runtime_error("config: " + path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) fail(path + "." + key, "unknown key");
}

double get_number(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) fail(path + "." + key, "missing required key");
    if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

double get_number_or(const json& obj, const std::string& path, const std::string& key,
                     double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

long get_integer(const json& obj, const std::string& path, const std::string& key,
                 long fallback, bool required = false) {
    if (!obj.contains(key)) {
        if (required) fail(path + "." + key, "missing required key");
        return fallback;
    }
    if (!obj[key].is_number_integer()) fail(path + "." + key, "expected an integer");
    return obj[key].get<long>();
}

std::string get_string_or(const json& obj, const std::string& path, const std::string& key,
                          const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) fail(path + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw std::runtime_error("config: top level must be an object");
    check_keys(root, "$", {"schema_version", "model", "unraveling", "ensemble", "output"});

    const long schema = get_integer(root, "$", "schema_version", kSchemaVersion);
    if (schema != kSchemaVersion)
        fail("$.schema_version", "unsupported version " + std::to_string(schema));

    RunConfig cfg;
    ModelSpec& spec = cfg.ensemble.spec;

    if (!root.contains("model")) fail("$.model", "missing required key");
    const json& model = root["model"];
    check_keys(model, "$.model",
               {"variant", "h", "J", "gamma", "L", "alpha", "sigma_convention", "units"});
    const std::string variant = get_string_or(model, "$.model", "variant", "I");
    if (variant == "I")
        spec.variant = ModelVariant::I_z_xx;
    else if (variant == "II")
        spec.variant = ModelVariant::II_x_zz;
    else
        fail("$.model.variant", "expected \"I\" or \"II\"");
    spec.h = get_number(model, "$.model", "h");
    spec.J = get_number(model, "$.model", "J");
    spec.gamma = get_number(model, "$.model", "gamma");
    if (spec.gamma < 0.0) fail("$.model.gamma", "must be >= 0");
    const long L = get_integer(model, "$.model", "L", 0, true);
    if (L < 1 || L > 64) fail("$.model.L", "must be in [1, 64]");
    spec.lattice = Lattice(int(L));
    if (!model.contains("alpha")) fail("$.model.alpha", "missing required key");
    if (model["alpha"].is_string()) {
        if (model["alpha"].get<std::string>() != "inf")
            fail("$.model.alpha", "expected a number or \"inf\"");
        spec.alpha = alpha_infinity;
    } else if (model["alpha"].is_number()) {
        const double a = model["alpha"].get<double>();
        if (a < 0.0) fail("$.model.alpha", "must be >= 0");
        spec.alpha = a;
    } else {
        fail("$.model.alpha", "expected a number or \"inf\"");
    }
    const std::string conv = get_string_or(model, "$.model", "sigma_convention", "paper");
    if (conv == "paper")
        spec.sigma_convention = SigmaConvention::paper;
    else if (conv == "half")
        spec.sigma_convention = SigmaConvention::half;
    else
        fail("$.model.sigma_convention", "expected \"paper\" or \"half\"");
    cfg.units = get_string_or(model, "$.model", "units", "gamma");
    if (cfg.units != "gamma" && cfg.units != "J")
        fail("$.model.units", "expected \"gamma\" or \"J\"");

    if (!root.contains("unraveling")) fail("$.unraveling", "missing required key");
    const json& unr = root["unraveling"];
    check_keys(unr, "$.unraveling",
               {"scheme", "dt", "t_final", "record_every", "record_points", "ode_rtol",
                "ode_atol"});
    const std::string scheme = get_string_or(unr, "$.unraveling", "scheme", "heterodyne");
    const double t_final = get_number(unr, "$.unraveling", "t_final");
    if (t_final <= 0.0) fail("$.unraveling.t_final", "must be > 0");
    if (scheme == "heterodyne") {
        cfg.ensemble.scheme = Unraveling::heterodyne;
        cfg.ensemble.het.dt = get_number(unr, "$.unraveling", "dt");
        if (cfg.ensemble.het.dt <= 0.0) fail("$.unraveling.dt", "must be > 0");
        cfg.ensemble.het.t_final = t_final;
        cfg.ensemble.het.record_every =
            int(get_integer(unr, "$.unraveling", "record_every", 100));
        if (cfg.ensemble.het.record_every < 1)
            fail("$.unraveling.record_every", "must be >= 1");
    } else if (scheme == "qjump") {
        cfg.ensemble.scheme = Unraveling::qjump;
        if (unr.contains("dt")) fail("$.unraveling.dt", "not used by the adaptive jump scheme");
        cfg.ensemble.qj.t_final = t_final;
        cfg.ensemble.qj.ode_rtol = get_number_or(unr, "$.unraveling", "ode_rtol", 1e-8);
        cfg.ensemble.qj.ode_atol = get_number_or(unr, "$.unraveling", "ode_atol", 1e-10);
        cfg.record_points = int(get_integer(unr, "$.unraveling", "record_points", 201));
        if (cfg.record_points < 2) fail("$.unraveling.record_points", "must be >= 2");
        cfg.ensemble.qj.record_grid = uniform_grid(t_final, cfg.record_points);
    } else {
        fail("$.unraveling.scheme", "expected \"heterodyne\" or \"qjump\"");
    }

    if (!root.contains("ensemble")) fail("$.ensemble", "missing required key");
    const json& ens = root["ensemble"];
    check_keys(ens, "$.ensemble", {"n_traj", "seed", "sample_start", "workers"});
    cfg.ensemble.n_traj = int(get_integer(ens, "$.ensemble", "n_traj", 0, true));
    if (cfg.ensemble.n_traj < 1) fail("$.ensemble.n_traj", "must be >= 1");
    cfg.ensemble.seed = std::uint64_t(get_integer(ens, "$.ensemble", "seed", 0, true));
    cfg.ensemble.sample_start = get_number_or(ens, "$.ensemble", "sample_start", -1.0);
    cfg.ensemble.workers = int(get_integer(ens, "$.ensemble", "workers", 1));
    if (cfg.ensemble.workers < 1) fail("$.ensemble.workers", "must be >= 1");

    if (root.contains("output")) {
        const json& out = root["output"];
        check_keys(out, "$.output", {"dir"});
        cfg.output_dir = get_string_or(out, "$.output", "dir", ".");
    }
    return cfg;
}

std::string RunConfig::canonical() const {
    json model;
    model["variant"] = ensemble.spec.variant == ModelVariant::I_z_xx ? "I" : "II";
    model["h"] = ensemble.spec.h;
    model["J"] = ensemble.spec.J;
    model["gamma"] = ensemble.spec.gamma;
    model["L"] = ensemble.spec.lattice.L;
    if (ensemble.spec.alpha.has_value())
        model["alpha"] = *ensemble.spec.alpha;
    else
        model["alpha"] = "inf";
    model["sigma_convention"] =
        ensemble.spec.sigma_convention == SigmaConvention::paper ? "paper" : "half";
    model["units"] = units;

    json unr;
    if (ensemble.scheme == Unraveling::heterodyne) {
        unr["scheme"] = "heterodyne";
        unr["dt"] = ensemble.het.dt;
        unr["t_final"] = ensemble.het.t_final;
        unr["record_every"] = ensemble.het.record_every;
    } else {
        unr["scheme"] = "qjump";
        unr["t_final"] = ensemble.qj.t_final;
        unr["ode_rtol"] = ensemble.qj.ode_rtol;
        unr["ode_atol"] = ensemble.qj.ode_atol;
        unr["record_points"] = record_points;
    }

    json ens;
    ens["n_traj"] = ensemble.n_traj;
    ens["seed"] = ensemble.seed;
    ens["sample_start"] = ensemble.sample_start;
    ens["workers"] = ensemble.workers;

    json root;
    root["schema_version"] = kSchemaVersion;
    root["model"] = model;
    root["unraveling"] = unr;
    root["ensemble"] = ens;
    root["output"]["dir"] = output_dir;
    return root.dump(2);
}

std::string RunConfig::hash() const {
    const std::string text = canonical();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

std::string emit_config(const RunConfig& config) { return config.canonical(); }

}  // namespace swqt
