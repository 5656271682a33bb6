#include "ckrf/grid.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace ckrf {

RadialGrid RadialGrid::uniform(double s_min, double s_max, int n_nodes) {
    if (!(s_min < s_max) || n_nodes < 8)
        throw std::invalid_argument("RadialGrid: need s_min < s_max and n_nodes >= 8");
    RadialGrid g;
    g.s_min = s_min;
    g.s_max = s_max;
    g.n_nodes = n_nodes;
    g.spacing = (s_max - s_min) / (n_nodes - 1);
    g.nodes.resize(static_cast<std::size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i)
        g.nodes[static_cast<std::size_t>(i)] = s_min + g.spacing * i;
    g.nodes.back() = s_max;
    return g;
}

double trapz(const RadialGrid& grid, const std::vector<double>& values) {
    assert(values.size() == grid.nodes.size());
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
    return sum * grid.spacing;
}

bool all_positive(const std::vector<double>& values, int* bad_node) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0)) {
            if (bad_node) *bad_node = static_cast<int>(i);
            return false;
        }
    }
    return true;
}

double measured_tail_exponent(const RadialGrid& grid, const std::vector<double>& values,
                              int side, double fraction) {
    const int n = grid.n_nodes;
    int m = std::max(4, static_cast<int>(fraction * n));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < m; ++k) {
        int i = (side < 0) ? k : n - 1 - k;
        double x = grid.s(i);
        double y = std::log(values[static_cast<std::size_t>(i)]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return (side < 0) ? slope : -slope;
}

bool check_exponents(const RadialGrid& grid, const Density& d, double rel_tol) {
    double left = measured_tail_exponent(grid, d.values, -1);
    double right = measured_tail_exponent(grid, d.values, +1);
    auto ok = [rel_tol](double got, double want) {
        return std::abs(got - want) <= rel_tol * std::max(1.0, std::abs(want));
    };
    return ok(left, d.left_exponent) && ok(right, d.right_exponent);
}

double SecondDiff::closure_left() const { return 1.0 - std::exp(-lambda_left * h); }
double SecondDiff::closure_right() const { return 1.0 - std::exp(-lambda_right * h); }

void SecondDiff::apply(const DDVec& f, std::vector<double>& out) const {
    out.resize(static_cast<std::size_t>(n));
    const double inv_h2 = 1.0 / (h * h);
    const double cl = closure_left(), cr = closure_right();
    out[0] = sub(f[1], f[0]).value() * cl * inv_h2;
    for (int i = 1; i + 1 < n; ++i) {
        dd num = sub(add(f[static_cast<std::size_t>(i + 1)], f[static_cast<std::size_t>(i - 1)]),
                     scale2(f[static_cast<std::size_t>(i)]));
        out[static_cast<std::size_t>(i)] = num.value() * inv_h2;
    }
    out[static_cast<std::size_t>(n - 1)] =
        sub(f[static_cast<std::size_t>(n - 2)], f[static_cast<std::size_t>(n - 1)]).value() * cr * inv_h2;
}

void SecondDiff::apply(const std::vector<double>& f, std::vector<double>& out) const {
    out.resize(static_cast<std::size_t>(n));
    const double inv_h2 = 1.0 / (h * h);
    out[0] = (f[1] - f[0]) * closure_left() * inv_h2;
    for (int i = 1; i + 1 < n; ++i)
        out[static_cast<std::size_t>(i)] =
            (f[static_cast<std::size_t>(i + 1)] - 2.0 * f[static_cast<std::size_t>(i)] +
             f[static_cast<std::size_t>(i - 1)]) * inv_h2;
    out[static_cast<std::size_t>(n - 1)] =
        (f[static_cast<std::size_t>(n - 2)] - f[static_cast<std::size_t>(n - 1)]) * closure_right() * inv_h2;
}

void SecondDiff::row(int i, double& lo, double& di, double& up) const {
    const double inv_h2 = 1.0 / (h * h);
    if (i == 0) {
        lo = 0.0;
        di = -closure_left() * inv_h2;
        up = closure_left() * inv_h2;
    } else if (i == n - 1) {
        lo = closure_right() * inv_h2;
        di = -closure_right() * inv_h2;
        up = 0.0;
    } else {
        lo = inv_h2;
        di = -2.0 * inv_h2;
        up = inv_h2;
    }
}

void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                       std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

std::vector<double> high_order_second_derivative(const RadialGrid& grid,
                                                 const std::vector<double>& f) {
    const int n = grid.n_nodes;
    const double inv_h2 = 1.0 / (grid.spacing * grid.spacing);
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    auto F = [&](int i) { return f[static_cast<std::size_t>(i)]; };
    for (int i = 3; i <= n - 4; ++i) {
        out[static_cast<std::size_t>(i)] =
            (2.0 * (F(i - 3) + F(i + 3)) - 27.0 * (F(i - 2) + F(i + 2)) +
             270.0 * (F(i - 1) + F(i + 1)) - 490.0 * F(i)) / 180.0 * inv_h2;
    }
    for (int i : {2, n - 3}) {
        out[static_cast<std::size_t>(i)] =
            (-(F(i - 2) + F(i + 2)) + 16.0 * (F(i - 1) + F(i + 1)) - 30.0 * F(i)) / 12.0 * inv_h2;
    }
    for (int i : {1, n - 2})
        out[static_cast<std::size_t>(i)] = (F(i - 1) - 2.0 * F(i) + F(i + 1)) * inv_h2;
    out[0] = out[1];
    out[static_cast<std::size_t>(n - 1)] = out[static_cast<std::size_t>(n - 2)];
    return out;
}

std::vector<double> fourth_order_second_derivative(const RadialGrid& grid,
                                                   const std::vector<double>& f) {
    const int n = grid.n_nodes;
    const double inv_h2 = 1.0 / (grid.spacing * grid.spacing);
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    auto F = [&](int i) { return f[static_cast<std::size_t>(i)]; };
    for (int i = 2; i <= n - 3; ++i)
        out[static_cast<std::size_t>(i)] =
            (-(F(i - 2) + F(i + 2)) + 16.0 * (F(i - 1) + F(i + 1)) - 30.0 * F(i)) / 12.0 * inv_h2;
    for (int i : {1, n - 2})
        out[static_cast<std::size_t>(i)] = (F(i - 1) - 2.0 * F(i) + F(i + 1)) * inv_h2;
    out[0] = out[1];
    out[static_cast<std::size_t>(n - 1)] = out[static_cast<std::size_t>(n - 2)];
    return out;
}

std::vector<double> centered_first_derivative(const RadialGrid& grid,
                                              const std::vector<double>& f) {
    const int n = grid.n_nodes;
    const double inv2h = 1.0 / (2.0 * grid.spacing);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 1; i + 1 < n; ++i)
        out[static_cast<std::size_t>(i)] =
            (f[static_cast<std::size_t>(i + 1)] - f[static_cast<std::size_t>(i - 1)]) * inv2h;
    out[0] = (f[1] - f[0]) / grid.spacing;
    out[static_cast<std::size_t>(n - 1)] =
        (f[static_cast<std::size_t>(n - 1)] - f[static_cast<std::size_t>(n - 2)]) / grid.spacing;
    return out;
}

} // namespace ckrf
