#include "ckrf/limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ckrf/errors.hpp"

namespace ckrf {

std::vector<double> limit_residual(const ReferenceBundle& refs, const SecondDiff& d2,
                                   const DDVec& psi, std::vector<double>* rho_out) {
    const int n = refs.grid.n_nodes;
    std::vector<double> d2psi;
    d2.apply(psi, d2psi);
    std::vector<double> res(static_cast<std::size_t>(n));
    std::vector<double> rho(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        rho[k] = refs.rho_chi[k] + d2psi[k];
        if (!(rho[k] > 0.0))
            throw PositivityLoss("limit metric density nonpositive at node " + std::to_string(i), i);
        // log[(rho_chi+psi'')/rho_chi] - psi - log G - log cone-weight
        //   = log(rho_chi+psi'') - log rho_W - psi
        res[k] = std::log(rho[k]) - refs.log_w[k] - psi[k].value();
    }
    if (rho_out) *rho_out = std::move(rho);
    return res;
}

namespace {

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

LimitSolution solve_limit(const ReferenceBundle& refs, const LimitParams& lp,
                          const std::vector<double>* initial_guess) {
    const int n = refs.grid.n_nodes;
    SecondDiff d2(refs.grid);
    DDVec psi(static_cast<std::size_t>(n), 0.0);
    if (initial_guess) {
        if (static_cast<int>(initial_guess->size()) != n)
            throw std::invalid_argument("solve_limit: initial guess has wrong size");
        psi = DDVec::from_values(*initial_guess);
    }

    std::vector<double> rho, res;
    res = limit_residual(refs, d2, psi, &rho); // PositivityLoss here = bad guess
    double resnorm = sup_abs(res);

    std::vector<double> lower, diag, upper, rhs;
    int damping_used = 0;
    for (int it = 0; it < lp.max_iter; ++it) {
        if (resnorm < lp.tol) break;
        // J = diag(1/rho) D2 - I
        lower.assign(static_cast<std::size_t>(n), 0.0);
        diag.assign(static_cast<std::size_t>(n), 0.0);
        upper.assign(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            double lo, di, up;
            d2.row(i, lo, di, up);
            const double w = 1.0 / rho[k];
            lower[k] = w * lo;
            diag[k] = w * di - 1.0;
            upper[k] = w * up;
        }
        rhs = res;
        for (auto& v : rhs) v = -v;
        solve_tridiagonal(lower, diag, upper, rhs);

        double alpha = 1.0;
        bool moved = false;
        while (damping_used <= lp.damping_budget) {
            DDVec cand = psi;
            std::vector<double> scaled(rhs.size());
            for (std::size_t k = 0; k < rhs.size(); ++k) scaled[k] = alpha * rhs[k];
            cand.add_inplace(scaled);
            try {
                std::vector<double> rho_c, res_c;
                res_c = limit_residual(refs, d2, cand, &rho_c);
                double rn = sup_abs(res_c);
                if (rn < resnorm || rn < lp.tol) {
                    psi = std::move(cand);
                    rho = std::move(rho_c);
                    res = std::move(res_c);
                    resnorm = rn;
                    moved = true;
                    break;
                }
            } catch (const PositivityLoss&) {
            }
            alpha *= 0.5;
            damping_used += 1;
        }
        if (!moved)
            throw NewtonDivergence("limit solve: damping budget exhausted, residual " +
                                   std::to_string(resnorm));
    }
    if (!(resnorm < lp.tol))
        throw NewtonDivergence("limit solve: iteration cap hit, residual " +
                               std::to_string(resnorm));

    LimitSolution sol;
    sol.psi = std::move(psi);
    sol.eps = refs.eps;
    sol.residual_norm = resnorm;
    sol.rho_chibar = std::move(rho);
    sol.chibar.values = sol.rho_chibar;
    sol.chibar.left_exponent = (refs.eps > 0.0 || refs.model.beta == 1.0) ? 1.0 : refs.model.beta;
    sol.chibar.right_exponent = 1.0;
    sol.chibar.cone_angle = (refs.eps > 0.0) ? 1.0 : refs.model.beta;
    return sol;
}

GkeReport verify_gke(const LimitSolution& sol, const ReferenceBundle& refs,
                     double window_s, double cone_exclusion_s) {
    const RadialGrid& grid = refs.grid;
    const int n = grid.n_nodes;
    GkeReport rep;
    rep.residual.assign(static_cast<std::size_t>(n), 0.0);
    rep.window.assign(static_cast<std::size_t>(n), 0);

    std::vector<double> logrho(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        logrho[static_cast<std::size_t>(i)] = std::log(sol.rho_chibar[static_cast<std::size_t>(i)]);
    std::vector<double> ddlog = fourth_order_second_derivative(grid, logrho);

    const double twist = 2.0 * refs.model.b / refs.model.a;
    for (int i = 2; i < n - 2; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double s = grid.s(i);
        rep.residual[k] = -ddlog[k] + sol.rho_chibar[k] - twist * refs.fs[k] - refs.a_eps[k];
        bool in = std::abs(s) <= window_s && s >= cone_exclusion_s;
        rep.window[k] = in ? 1 : 0;
        if (in) {
            rep.sup_density_form = std::max(rep.sup_density_form, std::abs(rep.residual[k]));
            rep.sup_trace_form =
                std::max(rep.sup_trace_form, std::abs(rep.residual[k] / sol.rho_chibar[k]));
        }
    }
    return rep;
}

LimitSolution extrapolate_limit(const std::vector<LimitSolution>& ladder,
                                const ReferenceBundle& refs_conical) {
    if (ladder.empty()) throw std::invalid_argument("extrapolate_limit: empty ladder");
    const std::size_t m = ladder.size();
    LimitSolution out;
    out.eps = 0.0;
    if (m == 1) {
        out.psi = ladder[0].psi;
    } else {
        const auto& pa = ladder[m - 2].psi;
        const auto& pb = ladder[m - 1].psi;
        double p_hat = 1.0;
        if (m >= 3) {
            const auto& p0 = ladder[m - 3].psi;
            double d1 = 0.0, d2n = 0.0;
            for (std::size_t i = 0; i < pa.size(); ++i) {
                d1 = std::max(d1, std::abs(sub(pa[i], p0[i]).value()));
                d2n = std::max(d2n, std::abs(sub(pb[i], pa[i]).value()));
            }
            if (d1 > 0.0 && d2n > 0.0) p_hat = std::log2(d1 / d2n);
            p_hat = std::clamp(p_hat, 0.3, 4.0);
        }
        const double fac = 1.0 / (std::pow(2.0, p_hat) - 1.0);
        out.psi = DDVec(pb.size());
        for (std::size_t i = 0; i < pb.size(); ++i) {
            dd diff = sub(pb[i], pa[i]);
            out.psi[i] = add(pb[i], dd(fac * diff.hi, fac * diff.lo));
        }
    }

    SecondDiff d2(refs_conical.grid, refs_conical.model.beta, 1.0);
    std::vector<double> d2psi;
    d2.apply(out.psi, d2psi);
    out.rho_chibar.resize(d2psi.size());
    for (std::size_t i = 0; i < d2psi.size(); ++i)
        out.rho_chibar[i] = refs_conical.rho_chi[i] + d2psi[i];
    out.chibar.values = out.rho_chibar;
    out.chibar.left_exponent = (refs_conical.model.beta == 1.0) ? 1.0 : refs_conical.model.beta;
    out.chibar.right_exponent = 1.0;
    out.chibar.cone_angle = refs_conical.model.beta;

    // informational: conical residual where the density stayed positive
    double rn = 0.0;
    for (std::size_t i = 0; i < out.rho_chibar.size(); ++i) {
        if (out.rho_chibar[i] > 0.0) {
            double r = std::log(out.rho_chibar[i]) - refs_conical.log_w[i] - out.psi[i].value();
            rn = std::max(rn, std::abs(r));
        }
    }
    out.residual_norm = rn;
    return out;
}

} // namespace ckrf
