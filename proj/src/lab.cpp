#include "ckrf/lab.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "ckrf/errors.hpp"
#include "ckrf/metric.hpp"

namespace ckrf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string rung_dirname(double eps) { return "rung_" + fmt(eps); }

double wall_seconds(const std::chrono::steady_clock::time_point& t0) {
    auto dt = std::chrono::steady_clock::now() - t0;
    return std::chrono::duration<double>(dt).count();
}

// parallel-for over rung/config indices; exceptions captured per task
void pool_run(int workers, int n_tasks, const std::function<void(int)>& task) {
    workers = std::max(1, std::min(workers, n_tasks));
    if (workers == 1) {
        for (int i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n_tasks) break;
                task(i);
            }
        });
    }
    for (auto& t : threads) t.join();
}

struct RungSummaryValues {
    double sup_abs_phi_max = 0, sup_abs_phi_dot_max = 0, tr_chistar_max = 0,
           tr_omega0_max = 0, ratio_min = 1e300, ratio_max = 0;
    double twisted_sup_t_ge1 = 0, t_twisted_max_early = 0;
    double t_grad_u_sq_max_early = 0, t_lap_u_min_early = 0;
    double sup_abs_v_end = 0, phi_dot_sup_at_10 = std::numeric_limits<double>::quiet_NaN();
    double max_diam_x = 0, min_diam_x = 1e300, max_diam_ref = 0, min_diam_ref = 1e300;
    double gh_at_10 = std::numeric_limits<double>::quiet_NaN();
};

RungSummaryValues reduce_rung(const RungArtifacts& art) {
    RungSummaryValues v;
    for (const auto& m : art.monitors) {
        v.sup_abs_phi_max = std::max(v.sup_abs_phi_max, m.sup_abs_phi);
        v.sup_abs_phi_dot_max = std::max(v.sup_abs_phi_dot_max, m.sup_abs_phi_dot);
        v.tr_chistar_max = std::max(v.tr_chistar_max, m.tr_chistar_sup);
        v.tr_omega0_max = std::max(v.tr_omega0_max, m.tr_omega0_sup);
        v.ratio_min = std::min(v.ratio_min, m.ratio_min);
        v.ratio_max = std::max(v.ratio_max, m.ratio_max);
        if (m.t >= 1.0 - 1e-9) v.twisted_sup_t_ge1 = std::max(v.twisted_sup_t_ge1, m.twisted_sup);
        if (m.t > 1e-12 && m.t <= 1.0 + 1e-9) {
            v.t_twisted_max_early = std::max(v.t_twisted_max_early, m.t * m.twisted_sup);
            v.t_grad_u_sq_max_early = std::max(v.t_grad_u_sq_max_early, m.t_grad_u_sq_sup);
            v.t_lap_u_min_early = std::min(v.t_lap_u_min_early, m.t_lap_u_inf);
        }
        if (std::abs(m.t - 10.0) < 1e-9) v.phi_dot_sup_at_10 = m.sup_abs_phi_dot;
    }
    if (!art.monitors.empty()) v.sup_abs_v_end = art.monitors.back().sup_abs_v;
    for (const auto& m : art.metrics) {
        v.max_diam_x = std::max(v.max_diam_x, m.diam_x);
        v.min_diam_x = std::min(v.min_diam_x, m.diam_x);
        v.max_diam_ref = std::max(v.max_diam_ref, m.diam_ref);
        v.min_diam_ref = std::min(v.min_diam_ref, m.diam_ref);
        if (std::abs(m.t - 10.0) < 1e-9) v.gh_at_10 = m.gh_bound;
    }
    return v;
}

// fitted decay rate of a monitor column with the Lemma 5.2 floor convention:
// nonpositive entries are floored; a window filled with floor values means the
// defect already collapsed and the bound holds trivially.
json fit_column(const std::vector<MonitorRecord>& rows,
                const std::function<double(const MonitorRecord&)>& col,
                double t_lo, double t_hi, bool floor_nonpositive) {
    json out;
    std::vector<double> ts, vs;
    bool all_floor = true;
    for (const auto& r : rows) {
        ts.push_back(r.t);
        double v = col(r);
        if (floor_nonpositive && v < 1e-16) v = 1e-16;
        if (r.t >= t_lo - 1e-9 && r.t <= t_hi + 1e-9 && v > 1e-12) all_floor = false;
        vs.push_back(v);
    }
    try {
        DecayFit f = fit_decay(ts, vs, t_lo, t_hi);
        out["rate"] = f.rate;
        out["intercept"] = f.intercept;
        out["rms"] = f.rms;
        out["status"] = "ok";
        if (floor_nonpositive && all_floor) out["status"] = "trivially_held";
    } catch (const TooFewSamples& e) {
        out["status"] = std::string("window unsatisfied: ") + e.what();
    } catch (const NonpositiveValue& e) {
        out["status"] = std::string("nonpositive values: ") + e.what();
    }
    return out;
}

json rung_to_json(const ModelConfig& cfg, const RungArtifacts& art) {
    json j;
    j["eps"] = art.eps;
    j["ok"] = art.ok;
    if (!art.ok) {
        j["error"] = art.error;
        return j;
    }
    RungSummaryValues v = reduce_rung(art);
    j["sup_abs_phi_max"] = v.sup_abs_phi_max;
    j["sup_abs_phi_dot_max"] = v.sup_abs_phi_dot_max;
    j["tr_chistar_max"] = v.tr_chistar_max;
    j["tr_omega0_max"] = v.tr_omega0_max;
    j["ratio_min"] = v.ratio_min;
    j["ratio_max"] = v.ratio_max;
    j["twisted_sup_t_ge1"] = v.twisted_sup_t_ge1;
    j["t_twisted_max_early"] = v.t_twisted_max_early;
    j["t_grad_u_sq_max_early"] = v.t_grad_u_sq_max_early;
    j["t_lap_u_min_early"] = v.t_lap_u_min_early;
    j["sup_abs_v_end"] = v.sup_abs_v_end;
    if (std::isfinite(v.phi_dot_sup_at_10)) j["phi_dot_sup_at_10"] = v.phi_dot_sup_at_10;
    j["max_area_defect"] = art.run.max_area_defect;
    j["max_principle_violations"] = art.run.max_principle_violations;
    j["total_steps"] = art.run.total_steps;
    j["limit_residual"] = art.psi.residual_norm;
    j["gke_sup_density"] = art.gke.sup_density_form;
    j["gke_sup_trace"] = art.gke.sup_trace_form;
    if (!art.metrics.empty()) {
        j["max_diam_x"] = v.max_diam_x;
        j["min_diam_x"] = v.min_diam_x;
        j["max_diam_ref"] = v.max_diam_ref;
        j["min_diam_ref"] = v.min_diam_ref;
        if (std::isfinite(v.gh_at_10)) j["gh_at_10"] = v.gh_at_10;
        json nb = json::array();
        for (std::size_t e = 0; e < cfg.metric.neighborhood_eps.size(); ++e) {
            double eps_gh = cfg.metric.neighborhood_eps[e];
            double t_thresh = std::max(
                0.0, 2.0 * std::log(std::sqrt(cfg.model.a) * kFsDiameter / eps_gh));
            double ratio = 0.0;
            bool any = false;
            for (const auto& m : art.metrics) {
                if (m.t + 1e-9 < t_thresh) continue;
                double d = m.neighborhood[e];
                if (std::isfinite(d)) {
                    ratio = std::max(ratio, d / eps_gh);
                    any = true;
                }
            }
            json r;
            r["eps_gh"] = eps_gh;
            r["t_threshold"] = t_thresh;
            if (any) r["max_ratio"] = ratio;
            nb.push_back(r);
        }
        j["neighborhood"] = nb;
    }
    const double t_lo = cfg.monitors.fit_t_lo, t_hi = cfg.monitors.fit_t_hi;
    j["fit_v"] = fit_column(art.monitors, [](const MonitorRecord& r) { return r.sup_abs_v; },
                            t_lo, t_hi, false);
    j["fit_phi_dot"] = fit_column(art.monitors,
                                  [](const MonitorRecord& r) { return r.sup_abs_phi_dot; },
                                  t_lo, t_hi, false);
    j["fit_trace_defect"] = fit_column(
        art.monitors, [](const MonitorRecord& r) { return r.weighted_trace_defect; }, t_lo, t_hi,
        true);
    j["fit_trace_defect_wide"] = fit_column(
        art.monitors, [](const MonitorRecord& r) { return r.weighted_trace_defect_wide; }, t_lo,
        t_hi, true);
    return j;
}

} // namespace

PipelineResult run_pipeline(const ModelConfig& cfg, const std::string& out_dir,
                            int workers, bool resume, double halt_at) {
    auto t_start = std::chrono::steady_clock::now();
    validate_config(cfg);
    const double t_stop = (halt_at > 0.0) ? std::min(halt_at, cfg.time.t_end) : cfg.time.t_end;

    PipelineResult res;
    res.cfg = cfg;
    res.hash = config_hash(cfg);
    res.out_dir = out_dir;

    fs::create_directories(out_dir);
    {
        std::ofstream f(fs::path(out_dir) / "config.json");
        f << config_to_json(cfg).dump(2) << '\n';
    }
    RunManifest manifest;
    manifest.config_hash = res.hash;
    manifest.created = std::to_string(std::chrono::duration_cast<std::chrono::milliseconds>(
                                          std::chrono::system_clock::now().time_since_epoch())
                                          .count());
    manifest.add_event("validate", "ok");

    const RadialGrid grid = make_grid(cfg);
    std::vector<ReferenceBundle> bundles;
    bundles.reserve(cfg.epsilon_ladder.size());
    for (double eps : cfg.epsilon_ladder)
        bundles.push_back(build_reference(cfg.model, grid, eps));
    manifest.add_event("references", "ok");

    // limit ladder: largest eps from zero, then warm-started continuation
    std::vector<LimitSolution> psis;
    {
        std::vector<double> guess;
        const std::vector<double>* gp = nullptr;
        for (std::size_t r = 0; r < bundles.size(); ++r) {
            psis.push_back(solve_limit(bundles[r], cfg.limit, gp));
            guess = psis.back().psi.values();
            gp = &guess;
        }
    }
    const ReferenceBundle refs0 = build_reference(cfg.model, grid, 0.0);
    res.psi_conical = extrapolate_limit(psis, refs0);
    manifest.add_event("limit_ladder", "ok");

    {
        SurfaceMetric2D mb = build_surface(grid, res.psi_conical.chibar.values,
                                           res.psi_conical.chibar.left_exponent,
                                           res.psi_conical.chibar.right_exponent,
                                           cfg.metric.mesh, 0, grid.n_nodes - 1, true, true);
        res.diam_limit_base = base_diameter(mb).diameter;
    }
    std::vector<int> tube_L(cfg.metric.neighborhood_eps.size(), 1);
    for (std::size_t e = 0; e < cfg.metric.neighborhood_eps.size(); ++e)
        tube_L[e] = tube_scale_exponent(grid, res.psi_conical.chibar, bundles[0].classes.c_chi,
                                        cfg.metric.neighborhood_eps[e], cfg.metric.mesh);

    res.rungs.resize(bundles.size());
    auto flow_t0 = std::chrono::steady_clock::now();

    auto rung_job = [&](int ri) {
        RungArtifacts& art = res.rungs[static_cast<std::size_t>(ri)];
        const ReferenceBundle& refs = bundles[static_cast<std::size_t>(ri)];
        art.eps = refs.eps;
        art.psi = psis[static_cast<std::size_t>(ri)];
        art.gke = verify_gke(art.psi, refs, cfg.monitors.gke_window,
                             cfg.monitors.gke_cone_exclusion);
        fs::path rdir = fs::path(out_dir) / rung_dirname(refs.eps);
        fs::create_directories(rdir / "checkpoints");
        try {
            FlowState st = initial_state(refs);
            double resume_t = -1.0;
            if (resume) {
                // latest checkpoint with a matching config hash wins
                double best_t = -1.0;
                fs::path best;
                for (const auto& entry : fs::directory_iterator(rdir / "checkpoints")) {
                    if (entry.path().extension() != ".json") continue;
                    try {
                        Checkpoint ck = load_checkpoint(entry.path().string());
                        if (ck.config_hash == res.hash && ck.t > best_t && ck.t <= cfg.time.t_end) {
                            best_t = ck.t;
                            best = entry.path();
                        }
                    } catch (...) {
                    }
                }
                if (best_t >= 0.0) {
                    st = load_checkpoint(best.string()).to_state(refs);
                    resume_t = st.t;
                    try {
                        auto prior = read_monitor_csv((rdir / "diagnostics.csv").string());
                        for (const auto& m : prior)
                            if (m.t <= resume_t + 1e-12) art.monitors.push_back(m);
                    } catch (...) {
                    }
                    try {
                        auto prior = read_metric_csv((rdir / "metrics.csv").string(),
                                                     cfg.metric.neighborhood_eps.size());
                        for (const auto& m : prior)
                            if (m.t <= resume_t + 1e-12) art.metrics.push_back(m);
                    } catch (...) {
                    }
                }
            }

            DiagnosticsOptions dopt;
            dopt.curvature_window = cfg.monitors.curvature_window;
            dopt.gamma = cfg.monitors.gamma;

            auto on_sample = [&](const FlowState& s) {
                if (s.t <= resume_t + 1e-12) return; // rows already on disk
                art.monitors.push_back(collect_monitors(s, refs, art.psi, dopt));
                double mq = s.t / cfg.metric.sample_dt;
                if (std::abs(mq - std::llround(mq)) < 1e-9 || std::abs(s.t - cfg.time.t_end) < 1e-12) {
                    MetricRecord mr;
                    mr.t = s.t;
                    SurfaceMetric2D surf = build_surface(grid, s.rho, 1.0, 1.0, cfg.metric.mesh,
                                                         0, grid.n_nodes - 1, true, true);
                    mr.diam_base = base_diameter(surf).diameter;
                    mr.fiber_diam = fiber_diameter(s.t, cfg.model.a);
                    mr.diam_x = std::hypot(mr.diam_base, mr.fiber_diam);
                    std::vector<double> ref_rho(s.rho.size());
                    const double et = std::exp(-s.t);
                    for (std::size_t i = 0; i < ref_rho.size(); ++i)
                        ref_rho[i] = et * refs.rho_omega0_base[i] + refs.rho_chistar[i];
                    SurfaceMetric2D surfr =
                        build_surface(grid, ref_rho, refs.chistar_density().left_exponent, 1.0,
                                      cfg.metric.mesh, 0, grid.n_nodes - 1, true, true);
                    mr.diam_ref = std::hypot(base_diameter(surfr).diameter, mr.fiber_diam);
                    mr.gh_bound = gh_upper_bound(grid, s.rho, 1.0, s.t, cfg.model.a,
                                                 res.psi_conical.chibar, cfg.metric.mesh,
                                                 cfg.metric.gh_source_stride);
                    for (std::size_t e = 0; e < cfg.metric.neighborhood_eps.size(); ++e) {
                        try {
                            mr.neighborhood.push_back(neighborhood_diameter(
                                grid, s.rho, 1.0, s.t, cfg.model.a, refs.classes.c_chi,
                                cfg.metric.neighborhood_eps[e], tube_L[e], cfg.metric.mesh));
                        } catch (const UnresolvedRegion&) {
                            mr.neighborhood.push_back(std::numeric_limits<double>::quiet_NaN());
                        }
                    }
                    art.metrics.push_back(mr);
                }
                double cq = s.t / cfg.time.checkpoint_dt;
                if (std::abs(cq - std::llround(cq)) < 1e-9 || std::abs(s.t - cfg.time.t_end) < 1e-12) {
                    Checkpoint ck = Checkpoint::from_state(s, res.hash);
                    save_checkpoint((rdir / "checkpoints" / ("ck_t" + fmt(s.t) + ".json")).string(), ck);
                }
            };

            StepControl ctrl;
            ctrl.dt = cfg.time.dt;
            ctrl.t_end = cfg.time.t_end;
            ctrl.sample_dt = cfg.time.sample_dt;
            ctrl.max_principle_lambda = std::min(cfg.monitors.max_principle_lambda, refs.lambda0);
            art.run = run_flow(refs, ctrl, cfg.newton, st, on_sample);
            art.ok = true;
        } catch (const std::exception& e) {
            art.ok = false;
            art.error = e.what();
        }
        write_monitor_csv((rdir / "diagnostics.csv").string(), art.monitors);
        write_metric_csv((rdir / "metrics.csv").string(), cfg.metric.neighborhood_eps, art.metrics);
    };

    pool_run(workers, static_cast<int>(bundles.size()), rung_job);
    double flow_wall = wall_seconds(flow_t0);
    manifest.add_event("flow_ladder", "ok");

    std::vector<const RunResult*> runs;
    std::vector<bool> oks;
    for (const auto& a : res.rungs) {
        runs.push_back(&a.run);
        oks.push_back(a.ok);
    }
    res.ladder = ladder_report(cfg.epsilon_ladder, runs, oks);

    json summary;
    summary["schema_version"] = 1;
    summary["config_hash"] = res.hash;
    summary["name"] = cfg.name;
    summary["flow_wall_s"] = flow_wall;
    summary["diam_limit_base"] = res.diam_limit_base;
    summary["limit_residual_conical_info"] = res.psi_conical.residual_norm;
    {
        GkeReport g0 = verify_gke(res.psi_conical, refs0, cfg.monitors.gke_window,
                                  cfg.monitors.gke_cone_exclusion);
        summary["gke_conical_sup_density"] = g0.sup_density_form;
        summary["gke_conical_sup_trace"] = g0.sup_trace_form;
    }
    json rungs = json::array();
    for (const auto& a : res.rungs) rungs.push_back(rung_to_json(cfg, a));
    summary["rungs"] = rungs;
    json ladder;
    ladder["cauchy_sup"] = res.ladder.cauchy_sup;
    ladder["monotone"] = res.ladder.monotone;
    ladder["complete"] = res.ladder.complete;
    ladder["warnings"] = res.ladder.warnings;
    summary["ladder"] = ladder;

    if (cfg.smoothing.enabled) {
        std::vector<std::vector<double>> times, supr;
        for (const auto& a : res.rungs) {
            std::vector<double> ts, rs;
            for (const auto& m : a.monitors) {
                ts.push_back(m.t);
                rs.push_back(std::max(std::abs(m.scal_min), std::abs(m.scal_max)));
            }
            times.push_back(ts);
            supr.push_back(rs);
        }
        SmoothingReport sr = instant_smoothing_report(cfg.epsilon_ladder, times, supr,
                                                      cfg.smoothing.t_min, cfg.smoothing.t0);
        json sj;
        json rt = json::array();
        for (const auto& r : sr.rungs) {
            json e;
            e["eps"] = r.eps;
            e["M"] = r.m_value;
            e["early_sup_R"] = r.early_sup;
            e["early_t"] = r.early_t;
            rt.push_back(e);
        }
        sj["rungs"] = rt;
        sj["m_drift_last_two"] = sr.m_drift_last_two;
        sj["min_early_growth"] = sr.min_early_growth;
        sj["consistent_with_c_over_t"] = sr.consistent_with_c_over_t;
        sj["verdict"] = sr.verdict;
        summary["smoothing"] = sj;
    }
    summary["total_wall_s"] = wall_seconds(t_start);
    res.summary = summary;
    {
        std::ofstream f(fs::path(out_dir) / "summary.json");
        f << summary.dump(2) << '\n';
    }
    manifest.add_event("summary", "ok");
    for (const auto& a : res.rungs) {
        manifest.record_file(out_dir, rung_dirname(a.eps) + "/diagnostics.csv");
        manifest.record_file(out_dir, rung_dirname(a.eps) + "/metrics.csv");
    }
    manifest.record_file(out_dir, "summary.json");
    manifest.record_file(out_dir, "config.json");
    save_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);
    return res;
}

int limit_pipeline(const ModelConfig& cfg, const std::string& out_dir) {
    validate_config(cfg);
    fs::create_directories(out_dir);
    const RadialGrid grid = make_grid(cfg);
    std::vector<LimitSolution> psis;
    std::vector<double> guess;
    const std::vector<double>* gp = nullptr;
    for (double eps : cfg.epsilon_ladder) {
        ReferenceBundle refs = build_reference(cfg.model, grid, eps);
        psis.push_back(solve_limit(refs, cfg.limit, gp));
        guess = psis.back().psi.values();
        gp = &guess;

        json j;
        j["schema_version"] = 1;
        j["config_hash"] = config_hash(cfg);
        j["eps"] = eps;
        j["residual_norm"] = psis.back().residual_norm;
        std::vector<double> hi(psis.back().psi.size()), lo(psis.back().psi.size());
        for (std::size_t i = 0; i < psis.back().psi.size(); ++i) {
            hi[i] = psis.back().psi[i].hi;
            lo[i] = psis.back().psi[i].lo;
        }
        j["psi_hi"] = hi;
        j["psi_lo"] = lo;
        std::ofstream f(fs::path(out_dir) / ("psi_" + fmt(eps) + ".json"));
        f << j.dump() << '\n';
    }
    ReferenceBundle refs0 = build_reference(cfg.model, grid, 0.0);
    LimitSolution con = extrapolate_limit(psis, refs0);

    // rung-to-rung continuity + cone-Einstein residual table
    std::ofstream gke_csv(fs::path(out_dir) / "gke_report.csv");
    gke_csv << "eps,sup_density_form,sup_trace_form,window_s\n";
    for (std::size_t r = 0; r < psis.size(); ++r) {
        ReferenceBundle refs = build_reference(cfg.model, grid, cfg.epsilon_ladder[r]);
        GkeReport g = verify_gke(psis[r], refs, cfg.monitors.gke_window,
                                 cfg.monitors.gke_cone_exclusion);
        gke_csv << fmt(cfg.epsilon_ladder[r]) << ',' << fmt(g.sup_density_form) << ','
                << fmt(g.sup_trace_form) << ',' << fmt(cfg.monitors.gke_window) << '\n';
    }
    GkeReport g0 = verify_gke(con, refs0, cfg.monitors.gke_window, cfg.monitors.gke_cone_exclusion);
    gke_csv << "0,"
            << fmt(g0.sup_density_form) << ',' << fmt(g0.sup_trace_form) << ','
            << fmt(cfg.monitors.gke_window) << '\n';
    gke_csv.close();

    json rep;
    rep["schema_version"] = 1;
    rep["config_hash"] = config_hash(cfg);
    json cauchy = json::array();
    for (std::size_t r = 0; r + 1 < psis.size(); ++r) {
        double sup = 0.0;
        for (std::size_t i = 0; i < psis[r].psi.size(); ++i)
            sup = std::max(sup, std::abs(sub(psis[r + 1].psi[i], psis[r].psi[i]).value()));
        cauchy.push_back(sup);
    }
    rep["psi_cauchy_sup"] = cauchy;
    bool mono = true;
    for (std::size_t r = 0; r + 1 < cauchy.size(); ++r)
        if (!(cauchy[r + 1].get<double>() <= cauchy[r].get<double>())) mono = false;
    rep["monotone"] = mono;
    rep["gke_conical_sup_density"] = g0.sup_density_form;
    std::ofstream f(fs::path(out_dir) / "limit_report.json");
    f << rep.dump(2) << '\n';
    std::cout << "limit ladder complete: " << psis.size() << " rungs, conical gke sup "
              << g0.sup_density_form << "\n";
    return 0;
}

} // namespace ckrf
