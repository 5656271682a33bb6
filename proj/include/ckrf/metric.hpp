#pragma once

#include <functional>
#include <vector>

#include "ckrf/grid.hpp"

namespace ckrf {

// Riemannian data of omega = rho(s) mu_s: g = (rho/2) ds^2 + 2 rho dtheta^2.
// Diameter of the unit Fubini-Study surface (pole-to-pole meridian length).
inline constexpr double kFsDiameter = 2.2214414690791831235; // pi/sqrt(2)

// Meridian geodesic length between two chart positions for an analytic
// density; adaptive quadrature, relative error <= tol.
double radial_distance(const std::function<double(double)>& rho, double s1, double s2,
                       double tol = 1e-12);

// chi-distance from the cone point to chart position s for chi = c_chi * FS:
// sqrt(2 c_chi) * atan(e^{s/2}), and its inverse.
double chi_radius(double c_chi, double s);
double chi_radius_inv(double c_chi, double r);

struct MeshParams {
    int n_s = 129;
    int n_theta = 32;
};

// Discrete carrier for distances on a rotationally symmetric surface:
// rings subsampled from the radial grid, theta periodic, 8-neighbor edges,
// optional pole nodes carrying the analytic exponent-matched tail lengths.
// Worst-case 8-neighbor metrication overestimate: sec(pi/8) ~ 1.0824.
struct SurfaceMetric2D {
    std::vector<double> s;            // ring chart positions
    std::vector<double> ring_rho;     // density at rings
    std::vector<double> meridian;     // cumulative meridian length at rings
    int n_theta = 0;
    double dtheta = 0.0;
    bool left_pole = false, right_pole = false;
    double left_tail = 0.0, right_tail = 0.0;

    int rings() const { return static_cast<int>(s.size()); }
    int nodes() const { return rings() * n_theta + (left_pole ? 1 : 0) + (right_pole ? 1 : 0); }
    int ring_node(int i, int j) const { return i * n_theta + j; }
    int left_pole_node() const { return rings() * n_theta; }
    int right_pole_node() const { return rings() * n_theta + (left_pole ? 1 : 0); }

    double s_edge(int i) const { return meridian[static_cast<std::size_t>(i + 1)] - meridian[static_cast<std::size_t>(i)]; }
    double theta_edge(int i) const;
    double diag_edge(int i) const;
};

inline constexpr double kMetricationTol = 0.083; // sec(pi/8)-1, rounded up

// Builds the surface over full-grid index range [i_lo, i_hi]; edge lengths
// come from a fine-grid cumulative meridian table so only the 8-neighbor
// metrication error and the tail truncation remain.
SurfaceMetric2D build_surface(const RadialGrid& grid, const std::vector<double>& rho,
                              double left_exponent, double right_exponent,
                              const MeshParams& mp, int i_lo, int i_hi,
                              bool left_pole, bool right_pole);

// Single-source shortest paths on the 8-neighbor weighted graph; deterministic.
std::vector<double> dijkstra_oracle(const SurfaceMetric2D& m, int source);

// Max over (theta = 0 sources) x (all nodes) of the Dijkstra field; rotational
// symmetry makes this the full max over pairs. Also returns the meridian
// envelope (full meridian + half the largest circumference) used as a sanity cap.
struct DiameterResult {
    double diameter = 0.0;
    double envelope = 0.0;
};
DiameterResult base_diameter(const SurfaceMetric2D& m);

// Fiber diameter e^{-t/2} sqrt(a) diam(FS), exact under the product ansatz.
double fiber_diameter(double t, double a);

// Diameter of the tube over the base ball of chi-radius eps_gh^L around the
// cone point, fiber included through the exact product formula.
// Throws UnresolvedRegion when fewer than 8 grid nodes fall in the ball.
double neighborhood_diameter(const RadialGrid& grid, const std::vector<double>& rho_t,
                             double left_exponent, double t, double a, double c_chi,
                             double eps_gh, int L, const MeshParams& mp);

// Smallest L >= 1 with diam(ball of chi-radius eps^L, chibar) <= eps/4.
int tube_scale_exponent(const RadialGrid& grid, const Density& chibar, double c_chi,
                        double eps_gh, const MeshParams& mp, int l_max = 8);

// Projection-correspondence upper bound for the Gromov-Hausdorff distance:
// sup_base fiber_diameter + sup over sampled pairs |d_t(base) - dbar|.
double gh_upper_bound(const RadialGrid& grid, const std::vector<double>& rho_t,
                      double left_exp_t, double t, double a,
                      const Density& chibar, const MeshParams& mp, int source_stride);

} // namespace ckrf
