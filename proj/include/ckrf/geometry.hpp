#pragma once

#include <vector>

#include "ckrf/grid.hpp"

namespace ckrf {

// Density of the Fubini-Study form in the reduced chart, e^s/(1+e^s)^2,
// normalized so that its Ricci form equals twice itself. Unit mass: the
// associated form represents 2*pi*c1(O(1)).
double fs_density(double s);

// |S'|^2_{h'} = e^s/(1+e^s) for the defining section of the cone point at
// z = 0, gauged so the supremum is 1 and the curvature form of h' is the
// Fubini-Study form (so -(log |S'|^2)'' = fs_density pointwise).
double section_norm_sq(double s);

// d/ds of section_norm_sq (= N(1-N)) and the log-derivative helpers.
double section_norm_sq_d1(double s);

struct EtaEval {
    double value = 0.0;
    double d1 = 0.0; // d/dx
    double d2 = 0.0; // d^2/dx^2
};

// Cone-smoothing family eta_eps(x) = beta * int_0^x ((r+eps^2)^beta - eps^{2beta})/r dr.
// Closed-form-free evaluation: log substitution + Gauss-Legendre to ~1e-14
// relative. beta = 1 collapses to the identity exactly; eps = 0 gives x^beta.
EtaEval eta_epsilon(double x, double eps, double beta);

struct ClassData {
    double t_max = 0.0; // first time the fiber class hits zero (= a/2)
    double c_chi = 0.0; // coefficient of the base FS class in chi (= 2b/a - 1 - beta)
};

// Class bookkeeping for the product model: omega_0 = a FS_F + b FS_B, cone
// point on the base. Throws ClassDegeneracy when the base class would
// degenerate no later than the fiber (c_chi <= 0).
ClassData tmax_and_classes(double a, double b, double beta);

// Core numeric parameters shared by solvers (the full run configuration with
// schedules and tolerances lives in config.hpp).
struct ModelParams {
    double a = 2.0;
    double b = 4.0;
    double beta = 0.5;
    double delta = 0.1;
};

// Everything the solvers need at one regularization level eps, reduced to
// radial densities on a shared grid.
struct ReferenceBundle {
    RadialGrid grid;
    ModelParams model;
    double eps = 0.0;
    ClassData classes;

    std::vector<double> fs;        // fs_density at nodes
    std::vector<double> norm;      // |S'|^2 at nodes
    std::vector<double> rho_chi;   // c_chi * fs (limit base class metric chi)
    std::vector<double> rho_omega0_base; // b * fs

    // Smoothed cone profile eta_eps(|S'|^2) with s-derivatives (analytic).
    std::vector<double> profile;   // P(s)
    std::vector<double> profile_d1;
    std::vector<double> profile_d2;

    std::vector<double> rho_chistar;   // rho_chi + delta * P''  (reference chi*)
    std::vector<double> log_rho_omega; // log of the base density of the volume form
    std::vector<double> rho_omega_vol; // exp of the above, mass-normalized to area(chi)
    std::vector<double> g_fn;          // G = rho_Omega / (2 rho_chi)
    std::vector<double> log_w;         // log rho_W = log rho_Omega - (1-beta) log(|S'|^2+eps^2) - log 2
    std::vector<double> rho_w;

    // A_eps density (1-beta) * [ (log(|S'|^2+eps^2))'' + fs ], analytic; zero for eps = 0.
    std::vector<double> a_eps;

    double lambda0 = 0.0;   // largest lambda with chi* + lambda*(profile)'' in [chi/2, 2chi]
    double area_omega0_base = 0.0;
    double area_chi = 0.0;
    double area_profile_d2 = 0.0; // trapz of P'' (tail flux, ~0)

    // Mixed reference density rho_{chi_t} = e^{-t} b fs + (1-e^{-t}) rho_chi.
    std::vector<double> chi_t(double t) const;
    double area_chi_t(double t) const;

    Density chistar_density() const;
    Density chi_density() const;
    Density volume_density() const;
};

// Builds the reference bundle: cone profile, chi*, the volume-form density
// (discrete Numerov integration of its defining second-order ODE, tails pinned
// to smooth-volume-form exponents and mass normalized to area(chi)), G, the
// regularized cone weight, and the delta-sweep bound lambda0.
// Throws PositivityLoss if delta makes chi* nonpositive (reports the node).
ReferenceBundle build_reference(const ModelParams& model, const RadialGrid& grid, double eps);

} // namespace ckrf
