#include "ckrf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "ckrf/errors.hpp"

namespace ckrf {

FlowState initial_state(const ReferenceBundle& refs) {
    FlowState st;
    st.t = 0.0;
    st.eps = refs.eps;
    st.phi = DDVec(static_cast<std::size_t>(refs.grid.n_nodes), 0.0);
    SecondDiff d2(refs.grid);
    st.phi_dot = flow_rhs(refs, d2, st.phi, 0.0, &st.rho);
    return st;
}

std::vector<double> flow_rhs(const ReferenceBundle& refs, const SecondDiff& d2,
                             const DDVec& phi, double t, std::vector<double>* rho_out) {
    const int n = refs.grid.n_nodes;
    const double delta = refs.model.delta;
    std::vector<double> d2phi;
    d2.apply(phi, d2phi);
    std::vector<double> rho = refs.chi_t(t);
    std::vector<double> F(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        rho[k] += delta * refs.profile_d2[k] + d2phi[k];
        if (!(rho[k] > 0.0))
            throw NonpositiveArgument("metric density nonpositive at node " + std::to_string(i), i);
        F[k] = std::log(rho[k]) - refs.log_w[k] - phi[k].value() - delta * refs.profile[k];
    }
    if (rho_out) *rho_out = std::move(rho);
    return F;
}

void flow_jacobian(const ReferenceBundle& refs, const SecondDiff& d2,
                   const std::vector<double>& rho, double dt,
                   std::vector<double>& lower, std::vector<double>& diag,
                   std::vector<double>& upper) {
    const int n = refs.grid.n_nodes;
    lower.assign(static_cast<std::size_t>(n), 0.0);
    diag.assign(static_cast<std::size_t>(n), 0.0);
    upper.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        double lo, di, up;
        d2.row(i, lo, di, up);
        const double w = dt / rho[k];
        lower[k] = -w * lo;
        diag[k] = 1.0 + dt - w * di;
        upper[k] = -w * up;
    }
}

namespace {

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

FlowState step_implicit(const FlowState& st, double dt, const ReferenceBundle& refs,
                        const SecondDiff& d2, const NewtonParams& np) {
    const int n = refs.grid.n_nodes;
    const double t1 = st.t + dt;

    DDVec phi = st.phi;
    // explicit predictor; fall back to the current iterate if it leaves the cone
    {
        std::vector<double> pred(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pred[static_cast<std::size_t>(i)] = dt * st.phi_dot[static_cast<std::size_t>(i)];
        DDVec trial = phi;
        trial.add_inplace(pred);
        try {
            std::vector<double> rho_probe;
            flow_rhs(refs, d2, trial, t1, &rho_probe);
            phi = trial;
        } catch (const NonpositiveArgument&) {
        }
    }

    std::vector<double> rho, F, res(static_cast<std::size_t>(n));
    auto eval = [&](const DDVec& p, std::vector<double>& rho_o, std::vector<double>& F_o,
                    std::vector<double>& res_o) {
        F_o = flow_rhs(refs, d2, p, t1, &rho_o);
        res_o.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            res_o[k] = sub(p[k], st.phi[k]).value() - dt * F_o[k];
        }
    };

    try {
        eval(phi, rho, F, res);
    } catch (const NonpositiveArgument&) {
        throw NewtonDivergence("backward-Euler entry state infeasible at t = " + std::to_string(t1));
    }
    double resnorm = sup_abs(res);

    std::vector<double> lower, diag, upper, rhs;
    for (int it = 0; it < np.max_iter; ++it) {
        if (resnorm < np.tol) {
            FlowState out;
            out.t = t1;
            out.eps = st.eps;
            out.phi = std::move(phi);
            out.phi_dot = std::move(F);
            out.rho = std::move(rho);
            out.step_count = st.step_count + 1;
            return out;
        }
        flow_jacobian(refs, d2, rho, dt, lower, diag, upper);
        rhs = res;
        for (auto& v : rhs) v = -v;
        solve_tridiagonal(lower, diag, upper, rhs);

        double alpha = 1.0;
        bool moved = false;
        for (int back = 0; back < 25; ++back) {
            DDVec cand = phi;
            std::vector<double> scaled(rhs.size());
            for (std::size_t k = 0; k < rhs.size(); ++k) scaled[k] = alpha * rhs[k];
            cand.add_inplace(scaled);
            try {
                std::vector<double> rho_c, F_c, res_c;
                eval(cand, rho_c, F_c, res_c);
                double rn = sup_abs(res_c);
                if (rn < resnorm || rn < np.tol) {
                    phi = std::move(cand);
                    rho = std::move(rho_c);
                    F = std::move(F_c);
                    res = std::move(res_c);
                    resnorm = rn;
                    moved = true;
                    break;
                }
            } catch (const NonpositiveArgument&) {
            }
            alpha *= 0.5;
        }
        if (!moved)
            throw NewtonDivergence("Newton stalled at t = " + std::to_string(t1) +
                                   ", residual " + std::to_string(resnorm));
    }
    if (resnorm < np.tol) {
        FlowState out;
        out.t = t1;
        out.eps = st.eps;
        out.phi = std::move(phi);
        out.phi_dot = std::move(F);
        out.rho = std::move(rho);
        out.step_count = st.step_count + 1;
        return out;
    }
    throw NewtonDivergence("Newton iteration cap hit at t = " + std::to_string(t1) +
                           ", residual " + std::to_string(resnorm));
}

bool max_principle_ok(const FlowState& st, const ReferenceBundle& refs,
                      const SecondDiff& d2, double lambda, double tol) {
    const int n = refs.grid.n_nodes;
    int imax = -1;
    double best = -1e300;
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        double lognorm = std::log(refs.norm[k]);
        double v = st.phi[k].value() + lambda * lognorm;
        if (v > best) { best = v; imax = i; }
    }
    if (imax <= 0 || imax >= n - 1) return true; // boundary argmax: tail, skip
    const auto k = static_cast<std::size_t>(imax);
    const double h2 = d2.h * d2.h;
    double d2logn = (std::log(refs.norm[k + 1]) - 2.0 * std::log(refs.norm[k]) +
                     std::log(refs.norm[k - 1])) / h2;
    std::vector<double> chi_t = refs.chi_t(st.t);
    double arg = chi_t[k] + refs.model.delta * refs.profile_d2[k] - lambda * d2logn;
    if (!(arg > 0.0)) return true; // bound vacuous here
    double bound = std::log(arg) - refs.log_w[k] - st.phi[k].value() -
                   refs.model.delta * refs.profile[k];
    return st.phi_dot[k] <= bound + tol;
}

RunResult run_flow(const ReferenceBundle& refs, const StepControl& ctrl,
                   const NewtonParams& np, FlowState& state,
                   const std::function<void(const FlowState&)>& on_sample) {
    RunResult rr;
    SecondDiff d2(refs.grid);
    const double dt_floor = ctrl.dt * std::ldexp(1.0, -ctrl.max_halvings);

    auto record_sample = [&](const FlowState& st) {
        rr.sample_times.push_back(st.t);
        rr.phi_snapshots.push_back(st.phi.values());
        if (on_sample) on_sample(st);
    };

    auto area_defect = [&](const FlowState& st) {
        double area = trapz(refs.grid, st.rho);
        double target = refs.area_chi_t(st.t) + refs.model.delta * refs.area_profile_d2;
        return std::abs(area - target);
    };

    long sample_index = static_cast<long>(std::llround(state.t / ctrl.sample_dt));
    if (std::abs(sample_index * ctrl.sample_dt - state.t) > 1e-9)
        sample_index = static_cast<long>(std::floor(state.t / ctrl.sample_dt));
    record_sample(state);

    double dt_cur = ctrl.dt;
    int clean = 0;
    rr.max_area_defect = area_defect(state);

    while (state.t < ctrl.t_end - 1e-12) {
        double t_next_sample = std::min((sample_index + 1) * ctrl.sample_dt, ctrl.t_end);
        double dt = std::min(dt_cur, t_next_sample - state.t);
        try {
            FlowState next = step_implicit(state, dt, refs, d2, np);
            rr.total_steps += 1;
            state = std::move(next);
            clean += 1;
            if (clean >= ctrl.clean_steps_to_double && dt_cur < ctrl.dt) {
                dt_cur = std::min(2.0 * dt_cur, ctrl.dt);
                clean = 0;
            }
        } catch (const NewtonDivergence&) {
            dt_cur *= 0.5;
            clean = 0;
            if (dt_cur < dt_floor)
                throw StepUnderflow("time step underflowed at t = " + std::to_string(state.t));
            continue;
        }
        rr.max_area_defect = std::max(rr.max_area_defect, area_defect(state));
        if (!max_principle_ok(state, refs, d2, ctrl.max_principle_lambda))
            rr.max_principle_violations += 1;
        if (state.t >= t_next_sample - 1e-12) {
            sample_index += 1;
            record_sample(state);
        }
    }
    return rr;
}

LadderReport ladder_report(const std::vector<double>& eps_values,
                           const std::vector<const RunResult*>& runs,
                           const std::vector<bool>& ok) {
    LadderReport rep;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        if (!ok[r]) {
            rep.complete = false;
            std::ostringstream os;
            os << "rung eps = " << eps_values[r] << " failed; ladder is partial";
            rep.warnings.push_back(os.str());
        }
    }
    for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
        if (!ok[r] || !ok[r + 1]) {
            rep.cauchy_sup.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const RunResult& A = *runs[r];
        const RunResult& B = *runs[r + 1];
        // align on shared sample times (a resumed rung may start later)
        double sup = 0.0;
        std::size_t ia = 0, ib = 0;
        while (ia < A.sample_times.size() && ib < B.sample_times.size()) {
            double ta = A.sample_times[ia], tb = B.sample_times[ib];
            if (std::abs(ta - tb) < 1e-9) {
                for (std::size_t i = 0; i < A.phi_snapshots[ia].size(); ++i)
                    sup = std::max(sup, std::abs(A.phi_snapshots[ia][i] - B.phi_snapshots[ib][i]));
                ++ia;
                ++ib;
            } else if (ta < tb) {
                ++ia;
            } else {
                ++ib;
            }
        }
        rep.cauchy_sup.push_back(sup);
    }
    for (std::size_t r = 0; r + 1 < rep.cauchy_sup.size(); ++r) {
        if (!(rep.cauchy_sup[r + 1] <= rep.cauchy_sup[r])) {
            rep.monotone = false;
            rep.warnings.push_back("Cauchy differences are not monotone along the ladder");
            break;
        }
    }
    return rep;
}

} // namespace ckrf
