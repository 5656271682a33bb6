#include "ckrf/config.hpp"

#include <cstdint>
#include <fstream>
#include <set>

#include "ckrf/errors.hpp"

namespace ckrf {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

double get_num(const json& j, const std::string& where, const std::string& key, double def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& where, const std::string& key, int def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return j.at(key).get<int>();
}

} // namespace

ModelConfig parse_config(const nlohmann::json& j) {
    ModelConfig c;
    require_keys(j, "config",
                 {"schema_version", "name", "model", "grid", "epsilon_ladder", "time", "newton",
                  "limit_solver", "monitors", "metric", "smoothing"});
    if (!j.contains("schema_version")) throw ConfigError("config: missing schema_version");
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != 1)
        throw ConfigError("config: unsupported schema_version " + std::to_string(c.schema_version));
    if (j.contains("name")) c.name = j.at("name").get<std::string>();

    if (j.contains("model")) {
        const auto& m = j.at("model");
        require_keys(m, "model", {"a", "b", "beta", "delta"});
        c.model.a = get_num(m, "model", "a", c.model.a);
        c.model.b = get_num(m, "model", "b", c.model.b);
        c.model.beta = get_num(m, "model", "beta", c.model.beta);
        c.model.delta = get_num(m, "model", "delta", c.model.delta);
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        require_keys(g, "grid", {"s_min", "s_max", "n_nodes"});
        c.grid.s_min = get_num(g, "grid", "s_min", c.grid.s_min);
        c.grid.s_max = get_num(g, "grid", "s_max", c.grid.s_max);
        c.grid.n_nodes = get_int(g, "grid", "n_nodes", c.grid.n_nodes);
    }
    if (j.contains("epsilon_ladder")) {
        if (!j.at("epsilon_ladder").is_array())
            throw ConfigError("epsilon_ladder: expected an array of numbers");
        c.epsilon_ladder = j.at("epsilon_ladder").get<std::vector<double>>();
    }
    if (j.contains("time")) {
        const auto& t = j.at("time");
        require_keys(t, "time", {"dt", "t_end", "sample_dt", "checkpoint_dt"});
        c.time.dt = get_num(t, "time", "dt", c.time.dt);
        c.time.t_end = get_num(t, "time", "t_end", c.time.t_end);
        c.time.sample_dt = get_num(t, "time", "sample_dt", c.time.sample_dt);
        c.time.checkpoint_dt = get_num(t, "time", "checkpoint_dt", c.time.checkpoint_dt);
    }
    if (j.contains("newton")) {
        const auto& n = j.at("newton");
        require_keys(n, "newton", {"tol", "max_iter"});
        c.newton.tol = get_num(n, "newton", "tol", c.newton.tol);
        c.newton.max_iter = get_int(n, "newton", "max_iter", c.newton.max_iter);
    }
    if (j.contains("limit_solver")) {
        const auto& n = j.at("limit_solver");
        require_keys(n, "limit_solver", {"tol", "max_iter", "damping_budget"});
        c.limit.tol = get_num(n, "limit_solver", "tol", c.limit.tol);
        c.limit.max_iter = get_int(n, "limit_solver", "max_iter", c.limit.max_iter);
        c.limit.damping_budget = get_int(n, "limit_solver", "damping_budget", c.limit.damping_budget);
    }
    if (j.contains("monitors")) {
        const auto& m = j.at("monitors");
        require_keys(m, "monitors",
                     {"fit_t_lo", "fit_t_hi", "gamma", "curvature_window", "gke_window",
                      "gke_cone_exclusion", "max_principle_lambda"});
        c.monitors.fit_t_lo = get_num(m, "monitors", "fit_t_lo", c.monitors.fit_t_lo);
        c.monitors.fit_t_hi = get_num(m, "monitors", "fit_t_hi", c.monitors.fit_t_hi);
        c.monitors.gamma = get_num(m, "monitors", "gamma", c.monitors.gamma);
        c.monitors.curvature_window = get_num(m, "monitors", "curvature_window", c.monitors.curvature_window);
        c.monitors.gke_window = get_num(m, "monitors", "gke_window", c.monitors.gke_window);
        c.monitors.gke_cone_exclusion =
            get_num(m, "monitors", "gke_cone_exclusion", c.monitors.gke_cone_exclusion);
        c.monitors.max_principle_lambda =
            get_num(m, "monitors", "max_principle_lambda", c.monitors.max_principle_lambda);
    }
    if (j.contains("metric")) {
        const auto& m = j.at("metric");
        require_keys(m, "metric",
                     {"n_s", "n_theta", "sample_dt", "gh_source_stride", "neighborhood_eps"});
        c.metric.mesh.n_s = get_int(m, "metric", "n_s", c.metric.mesh.n_s);
        c.metric.mesh.n_theta = get_int(m, "metric", "n_theta", c.metric.mesh.n_theta);
        c.metric.sample_dt = get_num(m, "metric", "sample_dt", c.metric.sample_dt);
        c.metric.gh_source_stride = get_int(m, "metric", "gh_source_stride", c.metric.gh_source_stride);
        if (m.contains("neighborhood_eps"))
            c.metric.neighborhood_eps = m.at("neighborhood_eps").get<std::vector<double>>();
    }
    if (j.contains("smoothing")) {
        const auto& s = j.at("smoothing");
        require_keys(s, "smoothing", {"enabled", "t0", "t_min"});
        if (s.contains("enabled")) c.smoothing.enabled = s.at("enabled").get<bool>();
        c.smoothing.t0 = get_num(s, "smoothing", "t0", c.smoothing.t0);
        c.smoothing.t_min = get_num(s, "smoothing", "t_min", c.smoothing.t_min);
    }
    return c;
}

ModelConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_config(j);
}

nlohmann::json config_to_json(const ModelConfig& c) {
    nlohmann::json j;
    j["schema_version"] = c.schema_version;
    j["name"] = c.name;
    j["model"] = {{"a", c.model.a}, {"b", c.model.b}, {"beta", c.model.beta}, {"delta", c.model.delta}};
    j["grid"] = {{"s_min", c.grid.s_min}, {"s_max", c.grid.s_max}, {"n_nodes", c.grid.n_nodes}};
    j["epsilon_ladder"] = c.epsilon_ladder;
    j["time"] = {{"dt", c.time.dt}, {"t_end", c.time.t_end}, {"sample_dt", c.time.sample_dt},
                 {"checkpoint_dt", c.time.checkpoint_dt}};
    j["newton"] = {{"tol", c.newton.tol}, {"max_iter", c.newton.max_iter}};
    j["limit_solver"] = {{"tol", c.limit.tol}, {"max_iter", c.limit.max_iter},
                         {"damping_budget", c.limit.damping_budget}};
    j["monitors"] = {{"fit_t_lo", c.monitors.fit_t_lo}, {"fit_t_hi", c.monitors.fit_t_hi},
                     {"gamma", c.monitors.gamma}, {"curvature_window", c.monitors.curvature_window},
                     {"gke_window", c.monitors.gke_window},
                     {"gke_cone_exclusion", c.monitors.gke_cone_exclusion},
                     {"max_principle_lambda", c.monitors.max_principle_lambda}};
    j["metric"] = {{"n_s", c.metric.mesh.n_s}, {"n_theta", c.metric.mesh.n_theta},
                   {"sample_dt", c.metric.sample_dt}, {"gh_source_stride", c.metric.gh_source_stride},
                   {"neighborhood_eps", c.metric.neighborhood_eps}};
    j["smoothing"] = {{"enabled", c.smoothing.enabled}, {"t0", c.smoothing.t0},
                      {"t_min", c.smoothing.t_min}};
    return j;
}

std::string config_hash(const ModelConfig& c) {
    std::string dump = config_to_json(c).dump(); // nlohmann sorts object keys
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

void validate_config(const ModelConfig& c) {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (!(c.model.a > 0.0)) fail("model.a must be positive");
    if (!(c.model.b > 0.0)) fail("model.b must be positive");
    if (!(c.model.beta > 0.0 && c.model.beta <= 1.0)) fail("model.beta must lie in (0,1]");
    if (!(c.model.delta > 0.0)) fail("model.delta must be positive");
    tmax_and_classes(c.model.a, c.model.b, c.model.beta); // ClassDegeneracy on failure
    if (!(c.grid.s_min < c.grid.s_max)) fail("grid.s_min must be below grid.s_max");
    if (c.grid.n_nodes < 64) fail("grid.n_nodes must be at least 64");
    if (c.epsilon_ladder.empty()) fail("epsilon_ladder must be nonempty");
    for (std::size_t i = 0; i < c.epsilon_ladder.size(); ++i) {
        if (!(c.epsilon_ladder[i] > 0.0)) fail("epsilon_ladder entries must be positive");
        if (i > 0 && !(c.epsilon_ladder[i] < c.epsilon_ladder[i - 1]))
            fail("epsilon_ladder must be strictly decreasing");
    }
    if (!(c.time.dt > 0.0)) fail("time.dt must be positive");
    if (!(c.time.t_end > 0.0)) fail("time.t_end must be positive");
    if (!(c.time.sample_dt >= c.time.dt))
        fail("time.sample_dt must be at least time.dt");
    if (!(c.newton.tol > 0.0) || c.newton.max_iter < 1) fail("newton parameters invalid");
    if (!(c.limit.tol > 0.0) || c.limit.max_iter < 1) fail("limit_solver parameters invalid");
    if (c.metric.mesh.n_s < 8 || c.metric.mesh.n_theta < 8) fail("metric mesh too coarse");
    if (c.smoothing.enabled) {
        if (!(c.model.beta > 0.5 && c.model.beta < 1.0))
            fail("smoothing report needs beta in (1/2, 1): the model cone curvature is "
                 "bounded otherwise");
        if (!(c.smoothing.t_min > 0.0 && c.smoothing.t_min < c.smoothing.t0))
            fail("smoothing window needs 0 < t_min < t0");
    }
    // a finite-T_max (Fano fiber) configuration is required: 1/T_max = 2/a > 0 always
    // holds here; positivity of the base class was checked by tmax_and_classes.
}

RadialGrid make_grid(const ModelConfig& c) {
    return RadialGrid::uniform(c.grid.s_min, c.grid.s_max, c.grid.n_nodes);
}

} // namespace ckrf
