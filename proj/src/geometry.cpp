#include "ckrf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ckrf/errors.hpp"
#include "ckrf/quadrature.hpp"

namespace ckrf {

double fs_density(double s) {
    double t = std::exp(-std::abs(s));
    double d = 1.0 + t;
    return t / (d * d);
}

double section_norm_sq(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    double e = std::exp(s);
    return e / (1.0 + e);
}

double section_norm_sq_d1(double s) {
    double n = section_norm_sq(s);
    return n * (1.0 - n);
}

namespace {

double log_section_norm_sq(double s) {
    // log(e^s/(1+e^s)) = s - log1p(e^s), stable on both tails
    if (s < 0.0) return s - std::log1p(std::exp(s));
    return -std::log1p(std::exp(-s));
}

} // namespace

EtaEval eta_epsilon(double x, double eps, double beta) {
    if (x < 0.0) throw std::invalid_argument("eta_epsilon: negative argument");
    if (beta == 1.0) return {x, 1.0, 0.0}; // integrand is identically 1
    if (eps == 0.0) {
        if (x == 0.0) return {0.0, std::numeric_limits<double>::infinity(),
                              -std::numeric_limits<double>::infinity()};
        double v = std::pow(x, beta);
        return {v, beta * v / x, beta * (beta - 1.0) * v / (x * x)};
    }
    const double e2 = eps * eps;
    const double e2b = std::pow(eps, 2.0 * beta);
    const double u = x / e2;

    EtaEval out;
    if (x == 0.0) {
        out.value = 0.0;
        out.d1 = beta * beta * e2b / e2;
        out.d2 = 0.5 * beta * beta * (beta - 1.0) * e2b / (e2 * e2);
        return out;
    }

    // value: substitute r = e2 (e^w - 1); integrand (e^{beta w}-1)/(1-e^{-w})
    const double W = std::log1p(u);
    auto g = [beta](double w) {
        if (w < 1e-8) return beta * (1.0 + 0.5 * (beta + 1.0) * w);
        return std::expm1(beta * w) / (-std::expm1(-w));
    };
    int panels = std::max(6, static_cast<int>(std::ceil(W)) + 2);
    out.value = beta * e2b * gauss_legendre(g, 0.0, W, panels);

    out.d1 = beta * e2b * std::expm1(beta * std::log1p(u)) / x;

    if (u < 1e-4) {
        double b2 = beta - 2.0, b3 = beta - 3.0, b4 = beta - 4.0;
        out.d2 = beta * beta * (beta - 1.0) * e2b / (e2 * e2) *
                 (0.5 + b2 * u / 3.0 + b2 * b3 * u * u / 8.0 + b2 * b3 * b4 * u * u * u / 30.0);
    } else {
        double xp = std::pow(x + e2, beta - 1.0);
        out.d2 = beta * (beta * xp * x - e2b * std::expm1(beta * std::log1p(u))) / (x * x);
    }
    return out;
}

ClassData tmax_and_classes(double a, double b, double beta) {
    if (!(a > 0.0) || !(b > 0.0) || !(beta > 0.0) || beta > 1.0)
        throw std::invalid_argument("tmax_and_classes: need a,b > 0 and beta in (0,1]");
    double c_chi = 2.0 * b / a - 1.0 - beta;
    if (!(c_chi > 0.0))
        throw ClassDegeneracy("base class coefficient 2b/a - 1 - beta = " + std::to_string(c_chi) +
                              " is nonpositive: base degenerates no later than the fiber");
    return {0.5 * a, c_chi};
}

std::vector<double> ReferenceBundle::chi_t(double t) const {
    const double et = std::exp(-t);
    std::vector<double> out(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i)
        out[i] = et * rho_omega0_base[i] + (1.0 - et) * rho_chi[i];
    return out;
}

double ReferenceBundle::area_chi_t(double t) const {
    const double et = std::exp(-t);
    return et * area_omega0_base + (1.0 - et) * area_chi;
}

Density ReferenceBundle::chistar_density() const {
    Density d;
    d.values = rho_chistar;
    d.left_exponent = (eps > 0.0 || model.beta == 1.0) ? 1.0 : model.beta;
    d.right_exponent = 1.0;
    d.cone_angle = (eps > 0.0) ? 1.0 : model.beta;
    return d;
}

Density ReferenceBundle::chi_density() const {
    Density d;
    d.values = rho_chi;
    return d;
}

Density ReferenceBundle::volume_density() const {
    Density d;
    d.values = rho_omega_vol;
    return d;
}

ReferenceBundle build_reference(const ModelParams& model, const RadialGrid& grid, double eps) {
    ReferenceBundle r;
    r.grid = grid;
    r.model = model;
    r.eps = eps;
    r.classes = tmax_and_classes(model.a, model.b, model.beta);

    const int n = grid.n_nodes;
    const double beta = model.beta;
    auto sz = static_cast<std::size_t>(n);
    r.fs.resize(sz);
    r.norm.resize(sz);
    r.rho_chi.resize(sz);
    r.rho_omega0_base.resize(sz);
    r.profile.resize(sz);
    r.profile_d1.resize(sz);
    r.profile_d2.resize(sz);
    r.a_eps.assign(sz, 0.0);

    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double s = grid.s(i);
        const double fsv = fs_density(s);
        const double N = section_norm_sq(s);
        const double N1 = N * (1.0 - N);
        const double N2 = N1 * (1.0 - 2.0 * N);
        r.fs[k] = fsv;
        r.norm[k] = N;
        r.rho_chi[k] = r.classes.c_chi * fsv;
        r.rho_omega0_base[k] = model.b * fsv;

        if (eps == 0.0) {
            // P = N^beta via the stable log form
            double P = std::exp(beta * log_section_norm_sq(s));
            r.profile[k] = P;
            r.profile_d1[k] = beta * P * (1.0 - N);
            r.profile_d2[k] = beta * P * (1.0 - N) * (beta - (1.0 + beta) * N);
        } else {
            EtaEval e = eta_epsilon(N, eps, beta);
            r.profile[k] = e.value;
            r.profile_d1[k] = e.d1 * N1;
            r.profile_d2[k] = e.d2 * N1 * N1 + e.d1 * N2;
            const double q = N + eps * eps;
            const double ddlog = N2 / q - N1 * N1 / (q * q); // (log(N+eps^2))''
            r.a_eps[k] = (1.0 - beta) * (ddlog + fsv);
        }
    }

    r.rho_chistar.resize(sz);
    for (std::size_t k = 0; k < sz; ++k)
        r.rho_chistar[k] = r.rho_chi[k] + model.delta * r.profile_d2[k];
    int bad = -1;
    if (!all_positive(r.rho_chistar, &bad))
        throw PositivityLoss("chi* density nonpositive at node " + std::to_string(bad) +
                                 " (s = " + std::to_string(grid.s(bad)) + "); reduce delta",
                             bad);

    // delta-sweep bound: chi + lambda P'' within [chi/2, 2 chi]
    double lambda0 = 1.0;
    for (std::size_t k = 0; k < sz; ++k) {
        double p = r.profile_d2[k];
        if (p > 0.0) lambda0 = std::min(lambda0, r.rho_chi[k] / p);
        else if (p < 0.0) lambda0 = std::min(lambda0, 0.5 * r.rho_chi[k] / (-p));
    }
    r.lambda0 = lambda0;

    // Volume-form density: Numerov integration of (log rho)'' = g with the
    // left tail pinned to slope +1 (smooth volume form) and mass = area(chi).
    std::vector<double> g(sz);
    for (std::size_t k = 0; k < sz; ++k)
        g[k] = r.rho_chi[k] - (2.0 / model.a) * model.b * r.fs[k] - (1.0 - beta) * r.fs[k];
    const double h = grid.spacing;
    std::vector<double> x(sz, 0.0);
    double g0p = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * h);
    x[0] = 0.0;
    x[1] = h + 0.5 * h * h * g[0] + h * h * h * g0p / 6.0;
    for (std::size_t k = 1; k + 1 < sz; ++k)
        x[k + 1] = 2.0 * x[k] - x[k - 1] + h * h / 12.0 * (g[k + 1] + 10.0 * g[k] + g[k - 1]);

    std::vector<double> rho_vol(sz);
    for (std::size_t k = 0; k < sz; ++k) rho_vol[k] = std::exp(x[k]);
    r.area_chi = trapz(grid, r.rho_chi);
    r.area_omega0_base = trapz(grid, r.rho_omega0_base);
    double mass = trapz(grid, rho_vol);
    const double scale = r.area_chi / mass;
    const double log_scale = std::log(scale);
    for (std::size_t k = 0; k < sz; ++k) {
        x[k] += log_scale;
        rho_vol[k] *= scale;
    }
    r.log_rho_omega = x;
    r.rho_omega_vol = rho_vol;

    r.g_fn.resize(sz);
    r.log_w.resize(sz);
    r.rho_w.resize(sz);
    const double log2 = std::log(2.0);
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        r.g_fn[k] = rho_vol[k] / (2.0 * r.rho_chi[k]);
        double logq;
        if (eps == 0.0) logq = log_section_norm_sq(grid.s(i));
        else logq = std::log(r.norm[k] + eps * eps);
        r.log_w[k] = x[k] - (1.0 - beta) * logq - log2;
        r.rho_w[k] = std::exp(r.log_w[k]);
    }

    r.area_profile_d2 = trapz(grid, r.profile_d2);
    return r;
}

} // namespace ckrf
