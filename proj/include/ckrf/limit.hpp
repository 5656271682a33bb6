#pragma once

#include <vector>

#include "ckrf/flow.hpp"
#include "ckrf/geometry.hpp"

namespace ckrf {

struct LimitParams {
    double tol = 1e-10;
    int max_iter = 80;
    int damping_budget = 40;
};

// Solution of the elliptic limit equation at one regularization level:
// (rho_chi + psi'') = e^psi G (|S'|^2+eps^2)^{-(1-beta)} rho_chi.
struct LimitSolution {
    DDVec psi;
    double eps = 0.0;
    double residual_norm = 0.0;
    std::vector<double> rho_chibar; // rho_chi + psi''
    Density chibar;
};

// Residual N(psi) = log[(rho_chi + psi'')/rho_chi] - psi - log G - log cone-weight.
std::vector<double> limit_residual(const ReferenceBundle& refs, const SecondDiff& d2,
                                   const DDVec& psi, std::vector<double>* rho_out = nullptr);

// Damped Newton, gauge-free (the e^psi term fixes the constant). Warm start
// from initial_guess when given; PositivityLoss reports an unusable guess.
LimitSolution solve_limit(const ReferenceBundle& refs, const LimitParams& lp,
                          const std::vector<double>* initial_guess = nullptr);

struct GkeReport {
    std::vector<double> residual;    // density-form residual at all nodes
    std::vector<char> window;        // 1 where the residual is assessed
    double sup_density_form = 0.0;
    double sup_trace_form = 0.0;
};

// Residual of the generalized cone-Einstein identity of the limit metric,
// - (log rho_chibar)'' + rho_chibar - (2b/a) fs - A_eps, with a 4th-order
// log-density stencil on an interior window (two spacings off the boundary,
// |s| <= window_s, s >= cone_exclusion_s).
GkeReport verify_gke(const LimitSolution& sol, const ReferenceBundle& refs,
                     double window_s, double cone_exclusion_s = -1e300);

// Richardson extrapolation of a descending ladder to eps = 0; the cone tail
// of chibar switches to exponent beta. Order is measured from the last three
// rungs and clamped to [0.3, 4].
LimitSolution extrapolate_limit(const std::vector<LimitSolution>& ladder,
                                const ReferenceBundle& refs_conical);

} // namespace ckrf
