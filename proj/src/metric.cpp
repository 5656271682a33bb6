#include "ckrf/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "ckrf/errors.hpp"
#include "ckrf/quadrature.hpp"

namespace ckrf {

double radial_distance(const std::function<double(double)>& rho, double s1, double s2,
                       double tol) {
    if (s2 < s1) std::swap(s1, s2);
    auto f = [&rho](double s) { return std::sqrt(0.5 * rho(s)); };
    return integrate(f, s1, s2, tol);
}

double chi_radius(double c_chi, double s) {
    return std::sqrt(2.0 * c_chi) * std::atan(std::exp(0.5 * s));
}

double chi_radius_inv(double c_chi, double r) {
    double x = r / std::sqrt(2.0 * c_chi);
    if (!(x > 0.0) || x >= M_PI_2)
        throw std::invalid_argument("chi_radius_inv: radius outside the chart");
    return 2.0 * std::log(std::tan(x));
}

double SurfaceMetric2D::theta_edge(int i) const {
    return dtheta * std::sqrt(2.0 * ring_rho[static_cast<std::size_t>(i)]);
}

double SurfaceMetric2D::diag_edge(int i) const {
    double ds = s_edge(i);
    double dt = 0.5 * dtheta * (std::sqrt(2.0 * ring_rho[static_cast<std::size_t>(i)]) +
                                std::sqrt(2.0 * ring_rho[static_cast<std::size_t>(i + 1)]));
    return std::sqrt(ds * ds + dt * dt);
}

SurfaceMetric2D build_surface(const RadialGrid& grid, const std::vector<double>& rho,
                              double left_exponent, double right_exponent,
                              const MeshParams& mp, int i_lo, int i_hi,
                              bool left_pole, bool right_pole) {
    SurfaceMetric2D m;
    m.n_theta = mp.n_theta;
    m.dtheta = 2.0 * M_PI / mp.n_theta;
    m.left_pole = left_pole;
    m.right_pole = right_pole;

    const int span = i_hi - i_lo;
    const int n_rings = std::min(mp.n_s, span + 1);
    std::vector<int> ring_idx;
    ring_idx.reserve(static_cast<std::size_t>(n_rings));
    for (int k = 0; k < n_rings; ++k)
        ring_idx.push_back(i_lo + static_cast<int>(std::llround(static_cast<double>(k) * span / (n_rings - 1))));
    ring_idx.front() = i_lo;
    ring_idx.back() = i_hi;

    // fine-grid cumulative meridian length over [i_lo, i_hi]
    std::vector<double> cum(static_cast<std::size_t>(span + 1), 0.0);
    auto len = [&](int i) { return std::sqrt(0.5 * rho[static_cast<std::size_t>(i)]); };
    for (int i = 0; i < span; ++i)
        cum[static_cast<std::size_t>(i + 1)] =
            cum[static_cast<std::size_t>(i)] +
            0.5 * grid.spacing * (len(i_lo + i) + len(i_lo + i + 1));

    for (int idx : ring_idx) {
        m.s.push_back(grid.s(idx));
        m.ring_rho.push_back(rho[static_cast<std::size_t>(idx)]);
        m.meridian.push_back(cum[static_cast<std::size_t>(idx - i_lo)]);
    }

    // exponent-matched analytic tails: int sqrt(rho/2) e^{lam (s-s0)/2} ds = sqrt(rho0/2)*2/lam
    if (left_pole)
        m.left_tail = std::sqrt(0.5 * rho[static_cast<std::size_t>(i_lo)]) * 2.0 / left_exponent;
    if (right_pole)
        m.right_tail = std::sqrt(0.5 * rho[static_cast<std::size_t>(i_hi)]) * 2.0 / right_exponent;
    return m;
}

std::vector<double> dijkstra_oracle(const SurfaceMetric2D& m, int source) {
    const int n = m.nodes();
    const int nr = m.rings();
    const int nt = m.n_theta;
    std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[static_cast<std::size_t>(source)] = 0.0;
    pq.push({0.0, source});

    auto relax = [&](int v, double nd) {
        if (nd < dist[static_cast<std::size_t>(v)]) {
            dist[static_cast<std::size_t>(v)] = nd;
            pq.push({nd, v});
        }
    };

    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[static_cast<std::size_t>(u)]) continue;
        if (u < nr * nt) {
            int i = u / nt, j = u % nt;
            int jm = (j + nt - 1) % nt, jp = (j + 1) % nt;
            relax(m.ring_node(i, jm), d + m.theta_edge(i));
            relax(m.ring_node(i, jp), d + m.theta_edge(i));
            if (i + 1 < nr) {
                relax(m.ring_node(i + 1, j), d + m.s_edge(i));
                relax(m.ring_node(i + 1, jm), d + m.diag_edge(i));
                relax(m.ring_node(i + 1, jp), d + m.diag_edge(i));
            }
            if (i > 0) {
                relax(m.ring_node(i - 1, j), d + m.s_edge(i - 1));
                relax(m.ring_node(i - 1, jm), d + m.diag_edge(i - 1));
                relax(m.ring_node(i - 1, jp), d + m.diag_edge(i - 1));
            }
            if (i == 0 && m.left_pole) relax(m.left_pole_node(), d + m.left_tail);
            if (i == nr - 1 && m.right_pole) relax(m.right_pole_node(), d + m.right_tail);
        } else if (m.left_pole && u == m.left_pole_node()) {
            for (int j = 0; j < nt; ++j) relax(m.ring_node(0, j), d + m.left_tail);
        } else if (m.right_pole && u == m.right_pole_node()) {
            for (int j = 0; j < nt; ++j) relax(m.ring_node(nr - 1, j), d + m.right_tail);
        }
    }
    return dist;
}

DiameterResult base_diameter(const SurfaceMetric2D& m) {
    DiameterResult out;
    const int nr = m.rings();
    std::vector<int> sources;
    for (int i = 0; i < nr; ++i) sources.push_back(m.ring_node(i, 0));
    if (m.left_pole) sources.push_back(m.left_pole_node());
    if (m.right_pole) sources.push_back(m.right_pole_node());
    for (int src : sources) {
        std::vector<double> dist = dijkstra_oracle(m, src);
        for (double d : dist)
            if (std::isfinite(d)) out.diameter = std::max(out.diameter, d);
    }
    double meridian_total = m.meridian.back() + m.left_tail + m.right_tail;
    double max_circ = 0.0;
    for (int i = 0; i < nr; ++i)
        max_circ = std::max(max_circ, m.n_theta * m.theta_edge(i));
    out.envelope = meridian_total + 0.5 * max_circ;
    return out;
}

double fiber_diameter(double t, double a) {
    return std::exp(-0.5 * t) * std::sqrt(a) * kFsDiameter;
}

double neighborhood_diameter(const RadialGrid& grid, const std::vector<double>& rho_t,
                             double left_exponent, double t, double a, double c_chi,
                             double eps_gh, int L, const MeshParams& mp) {
    const double target = std::pow(eps_gh, L);
    double s_r;
    try {
        s_r = chi_radius_inv(c_chi, target);
    } catch (const std::invalid_argument&) {
        throw UnresolvedRegion("base ball of chi-radius " + std::to_string(target) +
                               " is outside the chart");
    }
    int i_hi = -1;
    for (int i = 0; i < grid.n_nodes; ++i)
        if (grid.s(i) <= s_r) i_hi = i;
    if (i_hi + 1 < 8)
        throw UnresolvedRegion("base ball of chi-radius " + std::to_string(target) +
                               " holds only " + std::to_string(i_hi + 1) + " grid nodes");
    SurfaceMetric2D m =
        build_surface(grid, rho_t, left_exponent, 1.0, mp, 0, i_hi, true, false);
    double diam_b = base_diameter(m).diameter;
    double fd = fiber_diameter(t, a);
    return std::sqrt(diam_b * diam_b + fd * fd);
}

int tube_scale_exponent(const RadialGrid& grid, const Density& chibar, double c_chi,
                        double eps_gh, const MeshParams& mp, int l_max) {
    for (int L = 1; L <= l_max; ++L) {
        double target = std::pow(eps_gh, L);
        double s_r;
        try {
            s_r = chi_radius_inv(c_chi, target);
        } catch (const std::invalid_argument&) {
            continue;
        }
        int i_hi = -1;
        for (int i = 0; i < grid.n_nodes; ++i)
            if (grid.s(i) <= s_r) i_hi = i;
        if (i_hi + 1 < 8) return std::max(1, L - 1);
        SurfaceMetric2D m = build_surface(grid, chibar.values, chibar.left_exponent, 1.0,
                                          mp, 0, i_hi, true, false);
        if (base_diameter(m).diameter <= 0.25 * eps_gh) return L;
    }
    return l_max;
}

double gh_upper_bound(const RadialGrid& grid, const std::vector<double>& rho_t,
                      double left_exp_t, double t, double a,
                      const Density& chibar, const MeshParams& mp, int source_stride) {
    SurfaceMetric2D mt = build_surface(grid, rho_t, left_exp_t, 1.0, mp, 0,
                                       grid.n_nodes - 1, true, true);
    SurfaceMetric2D mb = build_surface(grid, chibar.values, chibar.left_exponent,
                                       chibar.right_exponent, mp, 0, grid.n_nodes - 1,
                                       true, true);
    std::vector<int> sources;
    for (int i = 0; i < mt.rings(); i += std::max(1, source_stride))
        sources.push_back(mt.ring_node(i, 0));
    sources.push_back(mt.left_pole_node());
    sources.push_back(mt.right_pole_node());

    double supdiff = 0.0;
    for (int src : sources) {
        std::vector<double> dt_field = dijkstra_oracle(mt, src);
        std::vector<double> db_field = dijkstra_oracle(mb, src);
        for (std::size_t k = 0; k < dt_field.size(); ++k)
            if (std::isfinite(dt_field[k]) && std::isfinite(db_field[k]))
                supdiff = std::max(supdiff, std::abs(dt_field[k] - db_field[k]));
    }
    return fiber_diameter(t, a) + supdiff;
}

} // namespace ckrf
