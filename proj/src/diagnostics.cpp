#include "ckrf/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "ckrf/errors.hpp"

namespace ckrf {

std::vector<double> scalar_curvature(const RadialGrid& grid, const std::vector<double>& rho) {
    const int n = grid.n_nodes;
    std::vector<double> logrho(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        logrho[static_cast<std::size_t>(i)] = std::log(rho[static_cast<std::size_t>(i)]);
    std::vector<double> dd = high_order_second_derivative(grid, logrho);
    std::vector<double> R(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        R[k] = -dd[k] / rho[k];
    }
    return R;
}

std::vector<char> resolvability_window(const RadialGrid& grid, double s_cap) {
    std::vector<char> mask(static_cast<std::size_t>(grid.n_nodes), 0);
    for (int i = 3; i < grid.n_nodes - 3; ++i)
        mask[static_cast<std::size_t>(i)] = std::abs(grid.s(i)) <= s_cap ? 1 : 0;
    return mask;
}

double masked_max(const std::vector<double>& v, const std::vector<char>& mask) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (mask[i]) m = std::max(m, v[i]);
    return m;
}

double masked_min(const std::vector<double>& v, const std::vector<char>& mask) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (mask[i]) m = std::min(m, v[i]);
    return m;
}

std::vector<double> twisted_scalar(const FlowState& st, const ReferenceBundle& refs) {
    std::vector<double> R = scalar_curvature(refs.grid, st.rho);
    const double twist = 2.0 * refs.model.b / refs.model.a;
    for (std::size_t k = 0; k < R.size(); ++k)
        R[k] -= (twist * refs.fs[k] + refs.a_eps[k]) / st.rho[k];
    return R;
}

TraceMonitors trace_monitors(const FlowState& st, const ReferenceBundle& refs) {
    TraceMonitors tm;
    tm.ratio_min = std::numeric_limits<double>::infinity();
    const double et = std::exp(-st.t);
    for (std::size_t k = 0; k < st.rho.size(); ++k) {
        double fiber_free = et * refs.rho_omega0_base[k];
        tm.tr_chistar_sup = std::max(tm.tr_chistar_sup, refs.rho_chistar[k] / st.rho[k]);
        tm.tr_omega0_sup = std::max(tm.tr_omega0_sup, 1.0 + fiber_free / st.rho[k]);
        double r = st.rho[k] / (fiber_free + refs.rho_chistar[k]);
        tm.ratio_min = std::min(tm.ratio_min, r);
        tm.ratio_max = std::max(tm.ratio_max, r);
    }
    return tm;
}

UDiagnostics u_diagnostics(const FlowState& st, const ReferenceBundle& refs, double window_s) {
    const RadialGrid& grid = refs.grid;
    const int n = grid.n_nodes;
    std::vector<double> u(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        u[k] = st.phi_dot[k] + st.phi[k].value() + refs.model.delta * refs.profile[k];
    }
    std::vector<double> du = centered_first_derivative(grid, u);
    UDiagnostics out;
    out.lap_inf = std::numeric_limits<double>::infinity();
    std::vector<char> mask = resolvability_window(grid, window_s);
    const double h2 = grid.spacing * grid.spacing;
    for (int i = 1; i < n - 1; ++i) {
        const auto k = static_cast<std::size_t>(i);
        double gsq = du[k] * du[k] / st.rho[k];
        out.grad_sq_sup = std::max(out.grad_sq_sup, gsq);
        if (mask[k]) {
            double lap = (u[k + 1] - 2.0 * u[k] + u[k - 1]) / h2 / st.rho[k];
            out.lap_inf = std::min(out.lap_inf, lap);
        }
    }
    if (!std::isfinite(out.lap_inf)) out.lap_inf = 0.0;
    return out;
}

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& values,
                   double t_lo, double t_hi) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_lo - 1e-12 || times[i] > t_hi + 1e-12) continue;
        if (!(values[i] > 0.0))
            throw NonpositiveValue("fit_decay: nonpositive value at t = " + std::to_string(times[i]));
        xs.push_back(times[i]);
        ys.push_back(std::log(values[i]));
    }
    if (xs.size() < 8)
        throw TooFewSamples("fit_decay: window unsatisfied, only " + std::to_string(xs.size()) +
                            " samples in [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) + "]");
    const double m = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / m;
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - (icpt + slope * xs[i]);
        ss += r * r;
    }
    DecayFit f;
    f.rate = -slope;
    f.intercept = icpt;
    f.rms = std::sqrt(ss / m);
    return f;
}

MonitorRecord collect_monitors(const FlowState& st, const ReferenceBundle& refs,
                               const LimitSolution& psi, const DiagnosticsOptions& opt) {
    const RadialGrid& grid = refs.grid;
    const int n = grid.n_nodes;
    MonitorRecord r;
    r.t = st.t;

    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        r.sup_abs_phi = std::max(r.sup_abs_phi, std::abs(st.phi[k].value()));
        r.sup_abs_phi_dot = std::max(r.sup_abs_phi_dot, std::abs(st.phi_dot[k]));
        double v = sub(add(st.phi[k], refs.model.delta * refs.profile[k]), psi.psi[k]).value();
        r.sup_abs_v = std::max(r.sup_abs_v, std::abs(v));
    }

    std::vector<char> mask = resolvability_window(grid, opt.curvature_window);
    std::vector<double> Rbase = scalar_curvature(grid, st.rho);
    const double fiber_trace = 2.0 * std::exp(st.t) / refs.model.a;
    {
        double mn = std::numeric_limits<double>::infinity();
        double mx = -mn;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            if (!mask[k]) continue;
            double Rprod = fiber_trace + Rbase[k];
            mn = std::min(mn, Rprod);
            mx = std::max(mx, Rprod);
        }
        r.scal_min = mn;
        r.scal_max = mx;
    }
    {
        std::vector<double> rt = twisted_scalar(st, refs);
        double sup = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            if (mask[k]) sup = std::max(sup, std::abs(rt[k]));
        }
        r.twisted_sup = sup;
    }

    TraceMonitors tm = trace_monitors(st, refs);
    r.tr_chistar_sup = tm.tr_chistar_sup;
    r.tr_omega0_sup = tm.tr_omega0_sup;
    r.ratio_min = tm.ratio_min;
    r.ratio_max = tm.ratio_max;

    UDiagnostics ud = u_diagnostics(st, refs, opt.curvature_window);
    r.t_grad_u_sq_sup = st.t * ud.grad_sq_sup;
    r.t_lap_u_inf = st.t * ud.lap_inf;

    const double gamma = opt.gamma < 0.0 ? (1.0 - refs.model.beta) : opt.gamma;
    double defect = 0.0, defect_wide = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        double tr_defect = psi.rho_chibar[k] / st.rho[k] - 1.0;
        double d = std::pow(refs.norm[k], gamma) * tr_defect;
        double dw = std::pow(refs.norm[k], 2.0 * gamma) * tr_defect;
        if (d > defect) defect = d;
        if (dw > defect_wide) defect_wide = dw;
    }
    r.weighted_trace_defect = defect;
    r.weighted_trace_defect_wide = defect_wide;

    double area = trapz(grid, st.rho);
    r.base_area = area;
    r.area_defect = std::abs(area - (refs.area_chi_t(st.t) + refs.model.delta * refs.area_profile_d2));
    r.fiber_area = refs.model.a * std::exp(-st.t);
    return r;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') { out.push_back(cur); cur.clear(); }
        else cur.push_back(c);
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc()) throw std::runtime_error("bad CSV number: " + s);
    return v;
}

} // namespace

const char* kMonitorCsvHeader =
    "t,sup_abs_phi,sup_abs_phi_dot,sup_abs_v,scal_min,scal_max,twisted_sup,"
    "tr_chistar_sup,tr_omega0_sup,ratio_min,ratio_max,t_grad_u_sq_sup,t_lap_u_inf,"
    "weighted_trace_defect,weighted_trace_defect_wide,area_defect,fiber_area,base_area";

std::string monitor_csv_row(const MonitorRecord& r) {
    std::ostringstream os;
    os << fmt(r.t) << ',' << fmt(r.sup_abs_phi) << ',' << fmt(r.sup_abs_phi_dot) << ','
       << fmt(r.sup_abs_v) << ',' << fmt(r.scal_min) << ',' << fmt(r.scal_max) << ','
       << fmt(r.twisted_sup) << ',' << fmt(r.tr_chistar_sup) << ',' << fmt(r.tr_omega0_sup) << ','
       << fmt(r.ratio_min) << ',' << fmt(r.ratio_max) << ',' << fmt(r.t_grad_u_sq_sup) << ','
       << fmt(r.t_lap_u_inf) << ',' << fmt(r.weighted_trace_defect) << ','
       << fmt(r.weighted_trace_defect_wide) << ',' << fmt(r.area_defect) << ','
       << fmt(r.fiber_area) << ',' << fmt(r.base_area);
    return os.str();
}

void write_monitor_csv(const std::string& path, const std::vector<MonitorRecord>& rows) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << kMonitorCsvHeader << '\n';
    for (const auto& r : rows) f << monitor_csv_row(r) << '\n';
}

std::vector<MonitorRecord> read_monitor_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty CSV: " + path);
    if (line != kMonitorCsvHeader) throw std::runtime_error("unexpected CSV header in " + path);
    std::vector<MonitorRecord> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto c = split_csv(line);
        if (c.size() != 18) throw std::runtime_error("bad CSV row in " + path);
        MonitorRecord r;
        r.t = parse_double(c[0]);
        r.sup_abs_phi = parse_double(c[1]);
        r.sup_abs_phi_dot = parse_double(c[2]);
        r.sup_abs_v = parse_double(c[3]);
        r.scal_min = parse_double(c[4]);
        r.scal_max = parse_double(c[5]);
        r.twisted_sup = parse_double(c[6]);
        r.tr_chistar_sup = parse_double(c[7]);
        r.tr_omega0_sup = parse_double(c[8]);
        r.ratio_min = parse_double(c[9]);
        r.ratio_max = parse_double(c[10]);
        r.t_grad_u_sq_sup = parse_double(c[11]);
        r.t_lap_u_inf = parse_double(c[12]);
        r.weighted_trace_defect = parse_double(c[13]);
        r.weighted_trace_defect_wide = parse_double(c[14]);
        r.area_defect = parse_double(c[15]);
        r.fiber_area = parse_double(c[16]);
        r.base_area = parse_double(c[17]);
        rows.push_back(r);
    }
    return rows;
}

std::string metric_csv_header(const std::vector<double>& eps_gh) {
    std::ostringstream os;
    os << "t,diam_base,diam_x,fiber_diam,diam_ref,gh_bound";
    for (double e : eps_gh) os << ",nbhd_" << fmt(e);
    return os.str();
}

std::string metric_csv_row(const MetricRecord& r) {
    std::ostringstream os;
    os << fmt(r.t) << ',' << fmt(r.diam_base) << ',' << fmt(r.diam_x) << ','
       << fmt(r.fiber_diam) << ',' << fmt(r.diam_ref) << ',' << fmt(r.gh_bound);
    for (double v : r.neighborhood) os << ',' << fmt(v);
    return os.str();
}

void write_metric_csv(const std::string& path, const std::vector<double>& eps_gh,
                      const std::vector<MetricRecord>& rows) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << metric_csv_header(eps_gh) << '\n';
    for (const auto& r : rows) f << metric_csv_row(r) << '\n';
}

std::vector<MetricRecord> read_metric_csv(const std::string& path, std::size_t n_eps) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty CSV: " + path);
    std::vector<MetricRecord> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto c = split_csv(line);
        if (c.size() != 6 + n_eps) throw std::runtime_error("bad CSV row in " + path);
        MetricRecord r;
        r.t = parse_double(c[0]);
        r.diam_base = parse_double(c[1]);
        r.diam_x = parse_double(c[2]);
        r.fiber_diam = parse_double(c[3]);
        r.diam_ref = parse_double(c[4]);
        r.gh_bound = parse_double(c[5]);
        for (std::size_t i = 0; i < n_eps; ++i) r.neighborhood.push_back(parse_double(c[6 + i]));
        rows.push_back(r);
    }
    return rows;
}

SmoothingReport instant_smoothing_report(const std::vector<double>& eps_values,
                                         const std::vector<std::vector<double>>& times,
                                         const std::vector<std::vector<double>>& sup_r,
                                         double t_min, double t0) {
    SmoothingReport rep;
    for (std::size_t r = 0; r < eps_values.size(); ++r) {
        SmoothingRung rung;
        rung.eps = eps_values[r];
        bool first = true;
        for (std::size_t i = 0; i < times[r].size(); ++i) {
            double t = times[r][i];
            if (t < t_min - 1e-12 || t > t0 + 1e-12) continue;
            rung.m_value = std::max(rung.m_value, t * sup_r[r][i]);
            if (first) {
                rung.early_sup = sup_r[r][i];
                rung.early_t = t;
                first = false;
            }
        }
        rep.rungs.push_back(rung);
    }
    const std::size_t m = rep.rungs.size();
    if (m >= 2) {
        double a = rep.rungs[m - 2].m_value, b = rep.rungs[m - 1].m_value;
        rep.m_drift_last_two = std::abs(b - a) / std::max(std::abs(a), 1e-300);
        for (std::size_t r = 0; r + 1 < m; ++r) {
            double g = rep.rungs[r + 1].early_sup / std::max(rep.rungs[r].early_sup, 1e-300);
            rep.min_early_growth = std::min(rep.min_early_growth, g);
        }
        rep.consistent_with_c_over_t = rep.m_drift_last_two < 0.20 && rep.min_early_growth >= 1.5;
        std::ostringstream os;
        os << (rep.consistent_with_c_over_t
                   ? "M(eps) stable while early-time curvature grows: consistent with C/t"
                   : "pattern not established");
        os << " (M drift " << rep.m_drift_last_two << ", min early growth "
           << rep.min_early_growth << ")";
        rep.verdict = os.str();
    } else {
        rep.verdict = "ladder too short";
    }
    return rep;
}

} // namespace ckrf
