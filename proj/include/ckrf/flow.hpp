#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ckrf/geometry.hpp"

namespace ckrf {

struct NewtonParams {
    double tol = 1e-10;
    int max_iter = 30;
};

// State of the reduced parabolic Monge-Ampere march at one regularization
// level. phi is compensated: its second differences carry physical content
// down to ~1e-13 near the truncation boundaries.
struct FlowState {
    double t = 0.0;
    DDVec phi;
    std::vector<double> phi_dot;
    double eps = 0.0;
    std::vector<double> rho; // cached base metric density rho_omega(s,t)
    long step_count = 0;
};

FlowState initial_state(const ReferenceBundle& refs);

// Right-hand side F(phi) = log[(rho_{chi_t} + delta P'' + phi'') / rho_W]
// - phi - delta P at time t. Throws NonpositiveArgument if the log argument
// fails to be positive (time step or delta too large).
std::vector<double> flow_rhs(const ReferenceBundle& refs, const SecondDiff& d2,
                             const DDVec& phi, double t,
                             std::vector<double>* rho_out = nullptr);

// Rows of the backward-Euler Newton matrix (1+dt) I - dt diag(1/rho) D2.
void flow_jacobian(const ReferenceBundle& refs, const SecondDiff& d2,
                   const std::vector<double>& rho, double dt,
                   std::vector<double>& lower, std::vector<double>& diag,
                   std::vector<double>& upper);

// One backward-Euler step solved by damped Newton on the tridiagonal
// linearization; accepts only when the residual sup-norm is below tol.
// Throws NewtonDivergence (caller halves dt) or propagates PositivityLoss.
FlowState step_implicit(const FlowState& st, double dt, const ReferenceBundle& refs,
                        const SecondDiff& d2, const NewtonParams& np);

struct StepControl {
    double dt = 5e-3;
    double t_end = 12.0;
    double sample_dt = 0.1;
    int clean_steps_to_double = 10;
    int max_halvings = 20;
    double max_principle_lambda = 0.1;
};

struct RunResult {
    std::vector<double> sample_times;
    std::vector<std::vector<double>> phi_snapshots; // values at sample times
    double max_area_defect = 0.0;
    int max_principle_violations = 0;
    long total_steps = 0;
    long newton_iterations = 0;
};

// Fixed-dt march with automatic halving on NewtonDivergence and doubling back
// after clean_steps_to_double clean steps (capped at ctrl.dt). on_sample fires
// at every multiple of sample_dt (including t of entry and t_end). state is
// advanced in place so a resumed state continues seamlessly.
RunResult run_flow(const ReferenceBundle& refs, const StepControl& ctrl,
                   const NewtonParams& np, FlowState& state,
                   const std::function<void(const FlowState&)>& on_sample);

// Discrete maximum-principle shadow: at the argmax of phi + lambda log|S'|^2 the
// time derivative must respect the bound obtained by dropping the phi-Hessian
// from the log. Returns true when satisfied (boundary argmax nodes are skipped).
bool max_principle_ok(const FlowState& st, const ReferenceBundle& refs,
                      const SecondDiff& d2, double lambda, double tol = 1e-9);

struct LadderReport {
    std::vector<double> cauchy_sup; // sup_{s,t} |phi_{eps_k} - phi_{eps_{k+1}}|
    bool monotone = true;
    bool complete = true;
    std::vector<std::string> warnings;
};

LadderReport ladder_report(const std::vector<double>& eps_values,
                           const std::vector<const RunResult*>& runs,
                           const std::vector<bool>& ok);

} // namespace ckrf
