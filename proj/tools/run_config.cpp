#include "run_config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

namespace mobility::cli {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + path + key + "'");
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& path, const char* key,
                  double fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number())
        throw ConfigError("'" + path + key + "' must be a number");
    return v->get<double>();
}

long get_integer(const json& obj, const std::string& path, const char* key,
                 long fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer())
        throw ConfigError("'" + path + key + "' must be an integer");
    return v->get<long>();
}

std::string get_string(const json& obj, const std::string& path,
                       const char* key, const std::string& fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string())
        throw ConfigError("'" + path + key + "' must be a string");
    return v->get<std::string>();
}

bool get_bool(const json& obj, const std::string& path, const char* key,
              bool fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean())
        throw ConfigError("'" + path + key + "' must be a boolean");
    return v->get<bool>();
}

ModelParams parse_model(const json& obj) {
    reject_unknown_keys(obj, "model.",
                        {"alpha", "sigma", "tau", "gamma", "p_a", "p_d"});
    const ModelParams d{0.15, 0.4, 0.1, 0.9, 0.0, 0.0};
    try {
        return validate_params(get_number(obj, "model.", "alpha", d.alpha),
                               get_number(obj, "model.", "sigma", d.sigma),
                               get_number(obj, "model.", "tau", d.tau),
                               get_number(obj, "model.", "gamma", d.gamma),
                               get_number(obj, "model.", "p_a", d.p_a),
                               get_number(obj, "model.", "p_d", d.p_d));
    } catch (const ModelError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

SolverConfig parse_solver(const json& obj) {
    reject_unknown_keys(obj, "solver.",
                        {"n_states", "n_actions", "tolerance",
                         "max_iterations", "interpolation", "method",
                         "eval_tolerance", "eval_max_iterations",
                         "max_policy_iterations"});
    SolverConfig config;
    config.n_states = static_cast<int>(
        get_integer(obj, "solver.", "n_states", config.n_states));
    config.n_actions = static_cast<int>(
        get_integer(obj, "solver.", "n_actions", config.n_actions));
    config.tolerance =
        get_number(obj, "solver.", "tolerance", config.tolerance);
    config.max_iterations =
        get_integer(obj, "solver.", "max_iterations", config.max_iterations);
    config.interpolation = parse_interpolation(
        get_string(obj, "solver.", "interpolation", "linear"));
    config.method =
        parse_method(get_string(obj, "solver.", "method", "value-iteration"));
    config.eval_tolerance =
        get_number(obj, "solver.", "eval_tolerance", config.eval_tolerance);
    config.eval_max_iterations = get_integer(
        obj, "solver.", "eval_max_iterations", config.eval_max_iterations);
    config.max_policy_iterations = get_integer(
        obj, "solver.", "max_policy_iterations", config.max_policy_iterations);
    try {
        config.validate();
    } catch (const ModelError& e) {
        throw ConfigError(std::string("solver: ") + e.what());
    }
    return config;
}

McBlock parse_mc(const json& obj) {
    reject_unknown_keys(obj, "simulate.mc.",
                        {"n_agents", "seed", "generations"});
    McBlock mc;
    const long agents = get_integer(obj, "simulate.mc.", "n_agents",
                                    static_cast<long>(mc.n_agents));
    if (agents < 1000)
        throw ConfigError("'simulate.mc.n_agents' must be >= 1000");
    mc.n_agents = static_cast<std::size_t>(agents);
    const json* seed = find(obj, "seed");
    if (seed) {
        if (!seed->is_number_unsigned() && !seed->is_number_integer())
            throw ConfigError("'simulate.mc.seed' must be an integer");
        mc.seed = seed->get<std::uint64_t>();
    }
    mc.generations = static_cast<int>(
        get_integer(obj, "simulate.mc.", "generations", mc.generations));
    if (mc.generations < 1)
        throw ConfigError("'simulate.mc.generations' must be >= 1");
    return mc;
}

SimulateBlock parse_simulate(const json& obj) {
    reject_unknown_keys(
        obj, "simulate.",
        {"phi0_init", "horizon", "initial_states", "baseline", "mc"});
    SimulateBlock sim;
    sim.phi0_init = get_number(obj, "simulate.", "phi0_init", sim.phi0_init);
    if (!(sim.phi0_init >= 0.0 && sim.phi0_init <= 1.0))
        throw ConfigError("'simulate.phi0_init' must lie in [0,1]");
    sim.horizon = static_cast<int>(
        get_integer(obj, "simulate.", "horizon", sim.horizon));
    if (sim.horizon < 1) throw ConfigError("'simulate.horizon' must be >= 1");
    sim.initial_states = static_cast<int>(
        get_integer(obj, "simulate.", "initial_states", sim.initial_states));
    if (sim.initial_states < 2)
        throw ConfigError("'simulate.initial_states' must be >= 2");
    sim.baseline = get_bool(obj, "simulate.", "baseline", sim.baseline);
    if (const json* mc = find(obj, "mc")) sim.mc = parse_mc(*mc);
    return sim;
}

SweepBlock default_sweep() {
    SweepBlock sweep;
    sweep.axes = {{"alpha", 0.02, 0.9, 20},
                  {"tau", 0.02, 0.9, 20},
                  {"gamma", 0.0, 0.95, 20}};
    return sweep;
}

SweepBlock parse_sweep(const json& obj) {
    reject_unknown_keys(obj, "sweep.", {"axes"});
    const json* axes = find(obj, "axes");
    if (!axes) return default_sweep();
    if (!axes->is_array()) throw ConfigError("'sweep.axes' must be an array");

    SweepBlock sweep;
    for (const json& axis : *axes) {
        reject_unknown_keys(axis, "sweep.axes[].",
                            {"param", "min", "max", "count"});
        SweepAxis out;
        out.param = get_string(axis, "sweep.axes[].", "param", "");
        if (out.param != "alpha" && out.param != "tau" && out.param != "gamma")
            throw ConfigError(
                "'sweep.axes[].param' must be alpha, tau or gamma");
        out.min = get_number(axis, "sweep.axes[].", "min", -1.0);
        out.max = get_number(axis, "sweep.axes[].", "max", -1.0);
        out.count = static_cast<int>(
            get_integer(axis, "sweep.axes[].", "count", 0));
        if (out.count < 2)
            throw ConfigError("'sweep.axes[].count' must be >= 2");
        if (!(out.min <= out.max))
            throw ConfigError("'sweep.axes[].min' must not exceed max");
        sweep.axes.push_back(out);
    }
    for (const char* name : {"alpha", "tau", "gamma"}) {
        int hits = 0;
        for (const auto& axis : sweep.axes) hits += axis.param == name;
        if (hits != 1)
            throw ConfigError(std::string("sweep must name axis '") + name +
                              "' exactly once");
    }
    return sweep;
}

OutputConfig parse_output(const json& obj) {
    reject_unknown_keys(obj, "output.", {"directory", "format", "precision"});
    OutputConfig out;
    out.directory = get_string(obj, "output.", "directory", out.directory);
    out.format = get_string(obj, "output.", "format", out.format);
    if (out.format != "csv" && out.format != "json")
        throw ConfigError("'output.format' must be csv or json");
    out.precision = static_cast<int>(
        get_integer(obj, "output.", "precision", out.precision));
    if (out.precision < 1 || out.precision > 17)
        throw ConfigError("'output.precision' must lie in [1,17]");
    return out;
}

} // namespace

Interpolation parse_interpolation(const std::string& name) {
    if (name == "linear") return Interpolation::linear;
    if (name == "nearest") return Interpolation::nearest;
    throw ConfigError("interpolation must be 'linear' or 'nearest', got '" +
                      name + "'");
}

Method parse_method(const std::string& name) {
    if (name == "value-iteration") return Method::value_iteration;
    if (name == "policy-iteration") return Method::policy_iteration;
    throw ConfigError(
        "method must be 'value-iteration' or 'policy-iteration', got '" +
        name + "'");
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    reject_unknown_keys(doc, "",
                        {"model", "solver", "simulate", "sweep", "output"});

    RunConfig config;
    config.sweep = default_sweep();
    if (const json* model = find(doc, "model")) config.model = parse_model(*model);
    if (const json* solver = find(doc, "solver"))
        config.solver = parse_solver(*solver);
    if (const json* sim = find(doc, "simulate"))
        config.simulate = parse_simulate(*sim);
    if (const json* sweep = find(doc, "sweep"))
        config.sweep = parse_sweep(*sweep);
    if (const json* output = find(doc, "output"))
        config.output = parse_output(*output);
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_config(text);
}

} // namespace mobility::cli
