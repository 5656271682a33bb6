#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ckrf/flow.hpp"
#include "ckrf/geometry.hpp"
#include "ckrf/limit.hpp"
#include "ckrf/metric.hpp"

namespace ckrf {

struct GridParams {
    double s_min = -30.0;
    double s_max = 30.0;
    int n_nodes = 2048;
};

struct TimeParams {
    double dt = 5e-3;
    double t_end = 12.0;
    double sample_dt = 0.1;
    double checkpoint_dt = 1.0;
};

struct MonitorParams {
    double fit_t_lo = 2.0;
    double fit_t_hi = 12.0;
    double gamma = -1.0; // < 0 means 1 - beta
    double curvature_window = 25.0;
    double gke_window = 10.0;
    double gke_cone_exclusion = -1e300;
    double max_principle_lambda = 0.1;
};

struct MetricScheduleParams {
    MeshParams mesh;
    double sample_dt = 1.0;
    int gh_source_stride = 8;
    std::vector<double> neighborhood_eps{0.2, 0.1, 0.05};
};

struct SmoothingParams {
    bool enabled = false;
    double t0 = 0.5;
    double t_min = 0.02;
};

// Full run configuration. JSON schema versioned; unknown keys are errors.
struct ModelConfig {
    int schema_version = 1;
    std::string name = "run";
    ModelParams model;
    GridParams grid;
    std::vector<double> epsilon_ladder{0.1, 0.05, 0.025, 0.0125};
    TimeParams time;
    NewtonParams newton;
    LimitParams limit;
    MonitorParams monitors;
    MetricScheduleParams metric;
    SmoothingParams smoothing;
};

ModelConfig parse_config(const nlohmann::json& j);
ModelConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ModelConfig& c);

// FNV-1a 64 over the canonical (sorted-key) dump; stable run identity.
std::string config_hash(const ModelConfig& c);

// Field-level validation; throws ConfigError or ClassDegeneracy.
void validate_config(const ModelConfig& c);

RadialGrid make_grid(const ModelConfig& c);

} // namespace ckrf
