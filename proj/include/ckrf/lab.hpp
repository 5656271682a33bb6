#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ckrf/checkpoint.hpp"
#include "ckrf/config.hpp"
#include "ckrf/diagnostics.hpp"
#include "ckrf/limit.hpp"

namespace ckrf {

struct RungArtifacts {
    double eps = 0.0;
    bool ok = false;
    std::string error;
    RunResult run;
    std::vector<MonitorRecord> monitors;
    std::vector<MetricRecord> metrics;
    LimitSolution psi;
    GkeReport gke;
};

struct PipelineResult {
    ModelConfig cfg;
    std::string hash;
    std::string out_dir;
    std::vector<RungArtifacts> rungs;
    LadderReport ladder;
    LimitSolution psi_conical;
    double diam_limit_base = 0.0; // diam(Y, dbar) of the extrapolated limit
    nlohmann::json summary;
};

// Full run lifecycle: validation, limit ladder (sequential, warm-started),
// flow ladder (parallel across rungs), diagnostics and metric series, ladder
// report, optional instant-smoothing report, summary + manifest on disk.
// resume = true picks up each rung from its latest matching checkpoint.
// halt_at > 0 stops the march early (operational/testing hook); it does not
// change the config identity.
PipelineResult run_pipeline(const ModelConfig& cfg, const std::string& out_dir,
                            int workers, bool resume, double halt_at = -1.0);

// Limit-only lifecycle: solves the ladder, extrapolates, emits psi records and
// the cone-Einstein residual table into out_dir.
int limit_pipeline(const ModelConfig& cfg, const std::string& out_dir);

struct CriterionResult {
    int id = 0;
    std::string name;
    bool evaluable = false;
    bool pass = false;
    std::string detail;
};

// Evaluates every acceptance criterion against stored run directories.
// main_dir: reference run; refined_dir: same config at doubled n_nodes;
// smoothing_dir: beta in (1/2,1) run with the smoothing window enabled.
// Missing artifacts mark the affected criteria not evaluable.
std::vector<CriterionResult> evaluate_criteria(const std::string& main_dir,
                                               const std::string& refined_dir,
                                               const std::string& smoothing_dir);

void print_criteria(const std::vector<CriterionResult>& results);
bool all_pass(const std::vector<CriterionResult>& results);

// Independent oracles behind acceptance criterion 11; shared with the unit
// suite so the acceptance table and tests stay in sync.
struct OracleOutcome {
    bool pass = false;
    std::string detail;
};
OracleOutcome oracle_jacobian_fd();
OracleOutcome oracle_dijkstra_radial();
OracleOutcome oracle_limit_uniqueness(const ModelConfig& cfg);
OracleOutcome oracle_richardson_order();
OracleOutcome oracle_fiber_collapse(const ModelConfig& cfg);

// Minimal standalone SVG polyline plot; the config hash rides along as
// provenance metadata.
void svg_line_plot(const std::string& path, const std::string& title,
                   const std::vector<std::string>& series_names,
                   const std::vector<double>& xs,
                   const std::vector<std::vector<double>>& ys,
                   const std::string& provenance, bool log_y = false);

void svg_scatter_plot(const std::string& path, const std::string& title,
                      const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::string& provenance);

// CLI entry points. Exit codes: 0 success, 2 validation failure,
// 3 solver failure, 4 verification failure.
int cmd_run(const std::string& config_path, const std::string& out_dir, int workers,
            bool resume);
int cmd_limit(const std::string& config_path, const std::string& out_dir);
int cmd_verify(const std::string& dir, std::string refined_dir, std::string smoothing_dir);
int cmd_sweep(const std::string& sweep_path, const std::string& out_dir, int workers);
int cmd_report(const std::string& run_dir, const std::string& out_dir);

} // namespace ckrf
