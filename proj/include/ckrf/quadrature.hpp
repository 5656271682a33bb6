#pragma once

#include <functional>

namespace ckrf {

// Composite 20-point Gauss-Legendre over [a,b] with n_panels panels.
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n_panels);

// Adaptive panel-doubling wrapper; stops when successive refinements agree to
// rel_tol (relative to the integral scale) or the panel budget is reached.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, int max_panels = 4096);

} // namespace ckrf
