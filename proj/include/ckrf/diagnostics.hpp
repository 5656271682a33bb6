#pragma once

#include <string>
#include <vector>

#include "ckrf/flow.hpp"
#include "ckrf/limit.hpp"

namespace ckrf {

// Scalar curvature of a rotationally symmetric base metric in the reduced
// chart: R(s) = -(log rho)''(s)/rho(s). High-order interior stencil; the first
// and last values are copies of their neighbors.
std::vector<double> scalar_curvature(const RadialGrid& grid, const std::vector<double>& rho);

// Nodes where log-differentiated quantities are numerically meaningful:
// |s| <= s_cap and at least three nodes off each boundary.
std::vector<char> resolvability_window(const RadialGrid& grid, double s_cap);

double masked_max(const std::vector<double>& v, const std::vector<char>& mask);
double masked_min(const std::vector<double>& v, const std::vector<char>& mask);

// Twisted scalar of the regularized flow: R - (1/T_max) tr omega_0 - tr A_eps,
// reduced by the exact fiber cancellation to
//   R_base - (2b/a) fs/rho - A_eps-density/rho.
// For eps = 0 the A_eps term vanishes off the divisor.
std::vector<double> twisted_scalar(const FlowState& st, const ReferenceBundle& refs);

struct TraceMonitors {
    double tr_chistar_sup = 0.0;  // sup_s rho_chistar / rho_omega
    double tr_omega0_sup = 0.0;   // sup_s [ 1 + e^{-t} b fs / rho_omega ]
    double ratio_min = 0.0;       // rho_omega / (e^{-t} b fs + rho_chistar)
    double ratio_max = 0.0;
};

TraceMonitors trace_monitors(const FlowState& st, const ReferenceBundle& refs);

struct UDiagnostics {
    double grad_sq_sup = 0.0; // sup_s |grad u|^2_omega = (u')^2 / rho
    double lap_inf = 0.0;     // inf_s Delta_omega u = u'' / rho (on the window)
};

UDiagnostics u_diagnostics(const FlowState& st, const ReferenceBundle& refs, double window_s);

struct DecayFit {
    double rate = 0.0;      // positive decay rate (negated log-linear slope)
    double intercept = 0.0; // fitted log value at t = 0
    double rms = 0.0;
};

// Least-squares line on (t, log value) within [t_lo, t_hi]. Requires >= 8
// samples (TooFewSamples) and strictly positive values (NonpositiveValue).
DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& values,
                   double t_lo, double t_hi);

struct DiagnosticsOptions {
    double curvature_window = 25.0;
    double gamma = -1.0; // weight exponent for the trace-defect monitor; <0 = 1-beta
};

// One complete per-sample-time record of the pointwise monitors.
struct MonitorRecord {
    double t = 0.0;
    double sup_abs_phi = 0.0;
    double sup_abs_phi_dot = 0.0;
    double sup_abs_v = 0.0;        // sup |phi + delta P - psi|
    double scal_min = 0.0;         // product scalar curvature extremes (window)
    double scal_max = 0.0;
    double twisted_sup = 0.0;      // sup |twisted scalar| (window)
    double tr_chistar_sup = 0.0;
    double tr_omega0_sup = 0.0;
    double ratio_min = 0.0;
    double ratio_max = 0.0;
    double t_grad_u_sq_sup = 0.0;  // t * sup |grad u|^2
    double t_lap_u_inf = 0.0;      // t * inf Delta u
    double weighted_trace_defect = 0.0;      // sup [ |S'|^{2 gamma} (tr_omega chibar - 1) ]_+
    double weighted_trace_defect_wide = 0.0; // same with the doubled weight exponent
    double area_defect = 0.0;
    double fiber_area = 0.0;       // a e^{-t}, analytic under the product ansatz
    double base_area = 0.0;
};

MonitorRecord collect_monitors(const FlowState& st, const ReferenceBundle& refs,
                               const LimitSolution& psi, const DiagnosticsOptions& opt);

extern const char* kMonitorCsvHeader;
std::string monitor_csv_row(const MonitorRecord& r);
void write_monitor_csv(const std::string& path, const std::vector<MonitorRecord>& rows);
std::vector<MonitorRecord> read_monitor_csv(const std::string& path);

// Dijkstra-based quantities sampled on the coarser metric stride.
struct MetricRecord {
    double t = 0.0;
    double diam_base = 0.0;     // base surface diameter under rho_omega(t)
    double diam_x = 0.0;        // sqrt(diam_base^2 + fiber_diam^2)
    double fiber_diam = 0.0;
    double diam_ref = 0.0;      // diameter of the collapsing reference surface
    double gh_bound = 0.0;
    std::vector<double> neighborhood; // one per configured eps_gh
};

std::string metric_csv_header(const std::vector<double>& eps_gh);
std::string metric_csv_row(const MetricRecord& r);
void write_metric_csv(const std::string& path, const std::vector<double>& eps_gh,
                      const std::vector<MetricRecord>& rows);
std::vector<MetricRecord> read_metric_csv(const std::string& path, std::size_t n_eps);

struct SmoothingRung {
    double eps = 0.0;
    double m_value = 0.0;     // sup over [t_min, t0] of t * sup_s |R|
    double early_sup = 0.0;   // sup_s |R| at the earliest sample >= t_min
    double early_t = 0.0;
};

struct SmoothingReport {
    std::vector<SmoothingRung> rungs;
    double m_drift_last_two = 0.0;   // relative variation of M across the two finest rungs
    double min_early_growth = 1e300; // min over halvings of early_sup ratio
    bool consistent_with_c_over_t = false;
    std::string verdict;
};

// Table M(eps) = sup t*sup_s|R| per rung; verdict is "consistent with C/t"
// when M is stable while the earliest-sample raw curvature grows as eps drops.
SmoothingReport instant_smoothing_report(const std::vector<double>& eps_values,
                                         const std::vector<std::vector<double>>& times,
                                         const std::vector<std::vector<double>>& sup_r,
                                         double t_min, double t0);

} // namespace ckrf
