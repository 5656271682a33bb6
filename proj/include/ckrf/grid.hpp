#pragma once

#include <cstddef>
#include <vector>

#include "ckrf/dd.hpp"

namespace ckrf {

// Uniform discretization of the base chart coordinate s = log|z|^2.
// s = -inf is the image of the cone point; s_min/s_max are truncations of the
// chart, not manifold boundaries (the poles are handled by tail asymptotics).
struct RadialGrid {
    double s_min = 0.0;
    double s_max = 0.0;
    int n_nodes = 0;
    double spacing = 0.0;
    std::vector<double> nodes;

    static RadialGrid uniform(double s_min, double s_max, int n_nodes);
    double s(int i) const { return nodes[static_cast<std::size_t>(i)]; }
};

// Radial density rho(s) of a rotationally symmetric (1,1)-form
// omega = rho(s) * mu_s, mu_s = i dz^dzbar / |z|^2, together with its declared
// tail exponents: rho ~ c e^{left_exponent * s} (s -> -inf) and
// rho ~ c e^{-right_exponent * s} (s -> +inf). left_exponent = beta encodes a
// cone of angle 2*pi*beta at z = 0; 1 is a smooth point.
struct Density {
    std::vector<double> values;
    double left_exponent = 1.0;
    double right_exponent = 1.0;
    double cone_angle = 1.0;
};

// Trapezoid mass int rho ds over the grid. Class areas mix linearly under this
// rule on a shared grid, which is what the conservation checks rely on.
double trapz(const RadialGrid& grid, const std::vector<double>& values);

bool all_positive(const std::vector<double>& values, int* bad_node = nullptr);

// Least-squares slope of log(values) over the outermost fraction of the grid,
// used to check declared tail exponents. side = -1 for the left tail, +1 right.
double measured_tail_exponent(const RadialGrid& grid, const std::vector<double>& values,
                              int side, double fraction = 0.10);

// Verifies |measured - declared| <= rel_tol * max(1, |declared|) on both tails.
bool check_exponents(const RadialGrid& grid, const Density& d, double rel_tol = 0.01);

// Tridiagonal second-difference operator with one-sided exponential tail
// closures: the ghost node is fitted to A + B e^{lambda s} on the left and
// A + B e^{-lambda s} on the right, which is exact for the true solution's
// tail shape and keeps the linearization tridiagonal.
struct SecondDiff {
    int n = 0;
    double h = 0.0;
    double lambda_left = 1.0;
    double lambda_right = 1.0;

    SecondDiff() = default;
    SecondDiff(const RadialGrid& grid, double lam_left = 1.0, double lam_right = 1.0)
        : n(grid.n_nodes), h(grid.spacing), lambda_left(lam_left), lambda_right(lam_right) {}

    double closure_left() const;  // d2_0   = cL * (f1     - f0    ) / h^2
    double closure_right() const; // d2_n-1 = cR * (f_{n-2} - f_{n-1}) / h^2

    void apply(const DDVec& f, std::vector<double>& out) const;
    void apply(const std::vector<double>& f, std::vector<double>& out) const;

    // Row i of the operator as (lower, diag, upper) including boundary closures.
    void row(int i, double& lo, double& di, double& up) const;
};

// Thomas solve of a tridiagonal system given by three diagonals; b is
// overwritten with the solution. No pivoting: rows are diagonally dominant in
// every use here (backward-Euler and damped-Newton linearizations).
void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                       std::vector<double>& upper, std::vector<double>& rhs);

// Centered interior stencils used by the diagnostics (6th order with 4th/2nd
// order fallback near the ends). Returns d2f/ds2 sampled at every node.
std::vector<double> high_order_second_derivative(const RadialGrid& grid,
                                                 const std::vector<double>& f);

// 4th-order variant (used by the cone-Einstein verifier).
std::vector<double> fourth_order_second_derivative(const RadialGrid& grid,
                                                   const std::vector<double>& f);

std::vector<double> centered_first_derivative(const RadialGrid& grid,
                                              const std::vector<double>& f);

} // namespace ckrf
