// peakonlab: batch experiments on traveling-wave and peakon solutions of the
// modified Camassa-Holm equation.  Every run emits a manifest.json with the
// full configuration and checksums of all written files; identical configs
// produce byte-identical CSV/JSON outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <thread>

#include "mch/curve_flows.hpp"
#include "mch/io.hpp"
#include "mch/peakon_dynamics.hpp"
#include "mch/phase_plane.hpp"
#include "mch/wave_builder.hpp"
#include "mch/weak_verifier.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mch;

namespace {

std::string fd(double x) { return io::fmt_double(x); }

json json_double(double x) {
    if (std::isfinite(x)) return x;
    return io::fmt_double(x); // "inf"/"-inf" literals in JSON
}

struct Emitter {
    fs::path dir;
    json config;
    std::map<std::string, std::string> checksums;

    void emit(const std::string& name, const std::string& body) {
        io::write_text_file(dir / name, body);
        checksums[name] = io::sha256_hex(body);
    }
    void finish() {
        json manifest;
        manifest["version"] = io::kVersion;
        manifest["config"] = config;
        manifest["files"] = checksums;
        io::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    }
};

std::string kind_name(wave::ProfileKind k) {
    switch (k) {
    case wave::ProfileKind::SmoothPeriodic: return "smooth_periodic";
    case wave::ProfileKind::PatchedPeriodic: return "patched_periodic";
    case wave::ProfileKind::Unbounded: return "unbounded";
    default: return "compact_support_composite";
    }
}

json profile_meta(const wave::WaveProfile& prof) {
    json meta;
    meta["params"] = {{"k", prof.params.k},
                      {"c", prof.params.c},
                      {"g", prof.params.g},
                      {"ell", json_double(prof.params.ell)}};
    meta["h"] = prof.h;
    meta["period"] = json_double(prof.period);
    meta["kind"] = kind_name(prof.kind);
    meta["g_flipped"] = prof.g_flipped;
    meta["xi_min"] = prof.xi_min;
    meta["xi_max"] = prof.xi_max;
    meta["joints"] = json::array();
    const auto reports = wave::verify_jump_conditions(prof);
    for (std::size_t i = 0; i < prof.joints.size(); ++i) {
        const auto& j = prof.joints[i];
        json jj = {{"xi", j.xi},
                   {"phi", j.phi},
                   {"v_left", j.v_left},
                   {"v_right", j.v_right}};
        if (i < reports.size()) {
            jj["residual1"] = reports[i].residual1;
            jj["residual2"] = reports[i].residual2;
        }
        meta["joints"].push_back(jj);
    }
    return meta;
}

int run_phase(Emitter& em, const ModelParams& p, const std::vector<double>& levels,
              int resolution, double phi_max, bool plot) {
    io::CsvTable csv;
    csv.header = {"phi", "v", "h", "sign"};
    for (double h : levels) {
        for (phase::BranchSign sign :
             {phase::BranchSign::Plus, phase::BranchSign::Minus}) {
            std::vector<phase::BranchSample> samples;
            try {
                samples = phase::sample_branch(p, h, sign, resolution, phi_max);
            } catch (const Error&) {
                continue; // empty branch at this level
            }
            const char* sn = sign == phase::BranchSign::Plus ? "plus" : "minus";
            for (const auto& s : samples)
                csv.rows.push_back({fd(s.phi), fd(s.v), fd(h), sn});
        }
    }
    em.emit("phase.csv", csv.str());

    json cps = json::array();
    for (const auto& cp : phase::classify_critical_points(p)) {
        cps.push_back({{"phi", cp.location.phi},
                       {"v", cp.location.v},
                       {"kind", cp.kind == phase::CritKind::Center   ? "center"
                                : cp.kind == phase::CritKind::Saddle ? "saddle"
                                                                     : "degenerate"},
                       {"on_c_hyperbola", cp.on_c_hyperbola},
                       {"discriminant", cp.discriminant}});
    }
    em.emit("critical_points.json", cps.dump(2) + "\n");
    if (plot) em.emit("phase.svg", io::render_phase_svg(p, levels, phi_max));
    return 0;
}

int run_wave(Emitter& em, const ModelParams& p, double h, int joint_index,
             int samples, double xi_window, bool plot) {
    wave::PatchOptions opt;
    opt.joint_index = joint_index;
    opt.samples = samples;
    opt.xi_window = xi_window;
    const wave::WaveProfile prof = wave::build_patched_solution(p, h, opt);

    io::CsvTable csv;
    csv.header = {"xi", "phi", "v", "segment_id"};
    for (std::size_t si = 0; si < prof.segments.size(); ++si) {
        const auto& seg = prof.segments[si];
        for (std::size_t i = 0; i < seg.xi.size(); ++i)
            csv.rows.push_back({fd(seg.xi[i]), fd(seg.phi[i]), fd(seg.v[i]),
                                std::to_string(si)});
    }
    em.emit("profile.csv", csv.str());
    em.emit("wave.json", profile_meta(prof).dump(2) + "\n");
    if (plot) em.emit("profile.svg", io::render_profile_svg(prof));
    return 0;
}

int run_peakons(Emitter& em, peakon::PeakonEnsemble ens, double t_end,
                peakon::EvolveOptions opt) {
    const peakon::Trajectory traj = peakon::evolve(ens, t_end, opt);
    const std::size_t n = ens.size();

    io::CsvTable csv;
    csv.header = {"t"};
    for (std::size_t i = 1; i <= n; ++i) csv.header.push_back("x_" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) csv.header.push_back("p_" + std::to_string(i));
    csv.header.push_back("H0");
    for (std::size_t r = 0; r < traj.t.size(); ++r) {
        std::vector<std::string> row{fd(traj.t[r])};
        for (double x : traj.x[r]) row.push_back(fd(x));
        for (double pv : traj.p[r]) row.push_back(fd(pv));
        row.push_back(fd(traj.h0[r]));
        csv.rows.push_back(std::move(row));
    }
    em.emit("trajectory.csv", csv.str());
    if (traj.collided) {
        json ev = {{"type", "collision"},
                   {"t", traj.collision_time},
                   {"pair", {traj.collision_pair.first, traj.collision_pair.second}}};
        em.emit("events.json", ev.dump(2) + "\n");
    }
    return 0;
}

// Re-ingest an emitted profile CSV plus its metadata as a verifier candidate.
weak::CandidateSolution candidate_from_files(const fs::path& dir, double* speed) {
    const json meta = json::parse(io::read_text_file(dir / "wave.json"));
    const io::CsvTable csv = io::parse_csv(io::read_text_file(dir / "profile.csv"));
    std::vector<double> xi, phi, v;
    for (const auto& row : csv.rows) {
        if (row.size() < 3) throw IoError("profile.csv: short row");
        xi.push_back(io::parse_double(row[0]));
        phi.push_back(io::parse_double(row[1]));
        v.push_back(io::parse_double(row[2]));
    }
    if (xi.size() < 2) throw IoError("profile.csv: too few samples");
    const double period = meta["period"].is_number()
                              ? meta["period"].get<double>()
                              : io::parse_double(meta["period"].get<std::string>());
    *speed = meta["params"]["c"].get<double>();

    weak::CandidateSolution cand;
    cand.k = meta["params"]["k"].get<double>();
    for (const auto& j : meta["joints"])
        cand.lines.push_back({j["xi"].get<double>(), *speed});
    if (std::isfinite(period) && period > 0.0) cand.line_period = period;
    const double xi0 = xi.front(), xi1 = xi.back();
    const double sp = *speed;
    cand.eval = [xi = std::move(xi), phi = std::move(phi), v = std::move(v),
                 xi0, xi1, period, sp](double x, double t) {
        double s = x - sp * t;
        if (std::isfinite(period) && period > 0.0)
            s = xi0 + s - period * std::floor((s - xi0) / period);
        s = std::clamp(s, xi0, xi1);
        const auto it = std::upper_bound(xi.begin(), xi.end(), s);
        std::size_t i = it == xi.begin() ? 0 : (std::size_t)(it - xi.begin()) - 1;
        if (i + 1 >= xi.size()) i = xi.size() - 2;
        const double w = xi[i + 1] > xi[i] ? (s - xi[i]) / (xi[i + 1] - xi[i]) : 0.0;
        return std::make_pair(phi[i] + w * (phi[i + 1] - phi[i]),
                              v[i] + w * (v[i + 1] - v[i]));
    };
    return cand;
}

int run_verify(Emitter& em, const weak::CandidateSolution& cand,
               unsigned long long seed, int n_tests, weak::SuiteConfig cfg) {
    const weak::SuiteResult res = weak::residual_suite(cand, seed, n_tests, cfg);
    json rep;
    rep["n_tests"] = n_tests;
    rep["seed"] = res.seed;
    rep["max_residual"] = res.max_normalized;
    rep["median_residual"] = res.median_normalized;
    rep["per_test"] = json::array();
    for (const auto& e : res.per_test)
        rep["per_test"].push_back({{"x0", e.x0},
                                   {"t0", e.t0},
                                   {"rx", e.rx},
                                   {"rt", e.rt},
                                   {"residual", e.residual},
                                   {"scale", e.scale},
                                   {"normalized", e.normalized}});
    em.emit("report.json", rep.dump(2) + "\n");
    return 0;
}

int run_curve(Emitter& em, const ModelParams& p, double h, int periods,
              int resolution, bool plot) {
    const wave::WaveProfile prof = wave::build_patched_solution(p, h);
    const curve::CurvatureData curv = curve::profile_to_curvature(prof);
    const curve::ClosureReport rep = curve::closure_check(curv);
    const int n_per = rep.closed && rep.n > 0 ? rep.n : periods;
    const curve::PlanarPolyline poly =
        curve::reconstruct_curve(curv, n_per, resolution);

    io::CsvTable csv;
    csv.header = {"s", "x", "y"};
    for (std::size_t i = 0; i < poly.vertices.size(); ++i)
        csv.rows.push_back(
            {fd(poly.s[i]), fd(poly.vertices[i][0]), fd(poly.vertices[i][1])});
    em.emit("curve.csv", csv.str());

    json cj = {{"closed", rep.closed},
               {"inconclusive", rep.inconclusive},
               {"m", rep.m},
               {"n", rep.n},
               {"theta_T", rep.theta_T},
               {"total_length", rep.total_length},
               {"gauss_bonnet", curve::gauss_bonnet(curv, n_per)}};
    em.emit("closure.json", cj.dump(2) + "\n");

    if (plot) {
        std::vector<double> cusps;
        for (int per = 0; per < n_per; ++per)
            for (const auto& a : curv.atoms) cusps.push_back(per * curv.period + a.s);
        std::sort(cusps.begin(), cusps.end());
        em.emit("curve.svg", io::render_curve_svg(poly, cusps));
    }
    return 0;
}

int run_sweep(Emitter& em, const ModelParams& p, double h_min, double h_max,
              int points, int jobs) {
    if (!(h_max > h_min) || points < 1)
        throw DomainError("sweep: empty h-range");
    std::vector<double> hs(points), theta(points), period(points);
    for (int i = 0; i < points; ++i)
        hs[i] = h_min + (h_max - h_min) * (i + 1) / points; // (h_min, h_max]

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next.fetch_add(1); i < points; i = next.fetch_add(1)) {
            theta[i] = curve::theta_total(p, hs[i]);
            wave::PatchOptions opt;
            opt.samples = 64;
            period[i] = wave::build_patched_solution(p, hs[i], opt).period;
        }
    };
    std::vector<std::thread> pool;
    const int nw = std::max(1, jobs);
    for (int w = 1; w < nw; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    io::CsvTable csv;
    csv.header = {"h", "theta_total", "T"};
    for (int i = 0; i < points; ++i)
        csv.rows.push_back({fd(hs[i]), fd(theta[i]), fd(period[i])});
    em.emit("sweep.csv", csv.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"traveling waves, peakons, and curve flows of the modified "
                 "Camassa-Holm equation"};
    app.require_subcommand(1);
    // free the short -h for the level-set value
    app.set_help_flag("--help", "print usage");

    std::string out_dir = "out";
    app.add_option("-o,--out", out_dir, "output directory")
        ->envname("PEAKONLAB_OUT");

    double k = 0.0, c = 2.0, g = 0.0, h = 0.0;
    std::string ell_str = "inf";
    bool plot = false;
    unsigned long long seed = 12345;

    auto add_params = [&](CLI::App* sub, bool with_h) {
        sub->set_help_flag("--help", "print usage");
        sub->fallthrough(); // accept global flags after the subcommand
        sub->add_option("--k", k, "dispersion parameter");
        sub->add_option("--c", c, "wave speed");
        sub->add_option("--g", g, "integration constant");
        sub->add_option("--ell", ell_str, "spatial period or 'inf'");
        if (with_h) sub->add_option("--h", h, "level-set value");
        sub->add_flag("--plot", plot, "emit SVG figures");
    };

    // phase
    auto* sp = app.add_subcommand("phase", "sample level sets and critical points");
    std::vector<double> levels;
    int resolution = 800;
    double phi_max = 6.0;
    add_params(sp, false);
    sp->add_option("--h", levels, "level values (repeatable)")->expected(-1);
    sp->add_option("--resolution", resolution, "samples per branch");
    sp->add_option("--phi-max", phi_max, "truncation radius");

    // wave
    auto* sw = app.add_subcommand("wave", "build a patched traveling profile");
    int joint_index = -1, samples = 2048;
    double xi_window = 20.0;
    add_params(sw, true);
    sw->add_option("--joint-index", joint_index, "arc unit override");
    sw->add_option("--samples", samples, "samples per segment");
    sw->add_option("--xi-window", xi_window, "half-window for pulses");

    // peakons
    auto* sk = app.add_subcommand("peakons", "evolve an N-peakon ensemble");
    std::string model = "mch";
    int n_peakons = 1;
    std::vector<double> amps{1.0}, poss;
    double t_end = 1.0, record_dt = 0.0, rel_tol = 1e-10, abs_tol = 1e-12;
    bool symplectic = false;
    double fixed_dt = 1e-3;
    add_params(sk, false);
    sk->add_option("--model", model, "mch or ch");
    sk->add_option("--n", n_peakons, "number of peakons");
    sk->add_option("--p", amps, "amplitudes (repeatable)")->expected(-1);
    sk->add_option("--x", poss, "initial positions (repeatable)")->expected(-1);
    sk->add_option("--t-end", t_end, "final time");
    sk->add_option("--record-dt", record_dt, "recording stride (0: every step)");
    sk->add_option("--rel-tol", rel_tol, "integrator relative tolerance");
    sk->add_option("--abs-tol", abs_tol, "integrator absolute tolerance");
    sk->add_flag("--symplectic", symplectic, "implicit midpoint (CH only)");
    sk->add_option("--dt", fixed_dt, "fixed step for --symplectic");

    // verify
    auto* sv = app.add_subcommand("verify", "weak-form residual suite");
    std::string input_dir;
    int n_tests = 10;
    double speed_override = std::nan("");
    double peakon_p = std::nan("");
    weak::SuiteConfig scfg;
    add_params(sv, true);
    sv->add_option("--input", input_dir, "re-ingest an emitted wave run");
    sv->add_option("--n-tests", n_tests, "number of bumps");
    sv->add_option("--seed", seed, "suite seed");
    sv->add_option("--speed", speed_override, "override candidate speed");
    sv->add_option("--peakon-p", peakon_p, "verify p G(x - ct) instead");
    sv->add_option("--x-lo", scfg.x_lo);
    sv->add_option("--x-hi", scfg.x_hi);
    sv->add_option("--t-lo", scfg.t_lo);
    sv->add_option("--t-hi", scfg.t_hi);

    // curve
    auto* sc = app.add_subcommand("curve", "reconstruct the cusped planar curve");
    int periods = 1, curve_res = 96;
    add_params(sc, true);
    sc->add_option("--periods", periods, "periods when closure is unknown");
    sc->add_option("--resolution", curve_res, "samples per smooth piece");

    // sweep
    auto* ss = app.add_subcommand("sweep", "theta_total over an h-range");
    double h_min = 0.0, h_max = 1.0;
    int points = 50, jobs = 1;
    add_params(ss, false);
    ss->add_option("--h-min", h_min)->required();
    ss->add_option("--h-max", h_max)->required();
    ss->add_option("--points", points, "grid size");
    ss->add_option("--jobs", jobs, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        const double ell = io::parse_double(ell_str);
        const ModelParams params{k, c, g, ell};

        Emitter em;
        em.dir = out_dir;
        json cfg;
        cfg["params"] = {{"k", k}, {"c", c}, {"g", g}, {"ell", json_double(ell)}};

        int rc = 0;
        if (sp->parsed()) {
            cfg["subcommand"] = "phase";
            cfg["h"] = levels;
            cfg["resolution"] = resolution;
            cfg["phi_max"] = phi_max;
            em.config = cfg;
            rc = run_phase(em, params, levels, resolution, phi_max, plot);
        } else if (sw->parsed()) {
            cfg["subcommand"] = "wave";
            cfg["h"] = h;
            cfg["joint_index"] = joint_index;
            cfg["samples"] = samples;
            cfg["xi_window"] = xi_window;
            em.config = cfg;
            rc = run_wave(em, params, h, joint_index, samples, xi_window, plot);
        } else if (sk->parsed()) {
            peakon::PeakonEnsemble ens;
            ens.model = model == "ch" ? peakon::Model::CH : peakon::Model::mCH;
            ens.ell = ell;
            ens.k = k;
            ens.amplitudes = amps;
            while ((int)ens.amplitudes.size() < n_peakons)
                ens.amplitudes.push_back(amps.back());
            ens.amplitudes.resize(n_peakons);
            if (poss.empty())
                for (int i = 0; i < n_peakons; ++i)
                    poss.push_back(2.0 * i - (n_peakons - 1));
            ens.positions = poss;
            peakon::EvolveOptions eo;
            eo.record_dt = record_dt;
            eo.rel_tol = rel_tol;
            eo.abs_tol = abs_tol;
            eo.symplectic = symplectic;
            eo.fixed_dt = fixed_dt;
            cfg["subcommand"] = "peakons";
            cfg["model"] = model;
            cfg["p"] = ens.amplitudes;
            cfg["x"] = ens.positions;
            cfg["t_end"] = t_end;
            cfg["record_dt"] = record_dt;
            em.config = cfg;
            rc = run_peakons(em, ens, t_end, eo);
        } else if (sv->parsed()) {
            weak::CandidateSolution cand;
            double spd = c;
            if (!input_dir.empty()) {
                cand = candidate_from_files(input_dir, &spd);
            } else if (!std::isnan(peakon_p)) {
                spd = std::isnan(speed_override) ? c : speed_override;
                cand = weak::candidate_from_peakon(peakon_p, spd, ell, k);
            } else {
                const wave::WaveProfile prof = wave::build_patched_solution(params, h);
                spd = std::isnan(speed_override) ? c : speed_override;
                cand = weak::candidate_from_profile(prof, spd);
            }
            if (!std::isnan(speed_override))
                for (auto& ln : cand.lines) ln.speed = speed_override;
            cfg["subcommand"] = "verify";
            cfg["seed"] = seed;
            cfg["n_tests"] = n_tests;
            cfg["speed"] = spd;
            em.config = cfg;
            rc = run_verify(em, cand, seed, n_tests, scfg);
        } else if (sc->parsed()) {
            cfg["subcommand"] = "curve";
            cfg["h"] = h;
            cfg["periods"] = periods;
            cfg["resolution"] = curve_res;
            em.config = cfg;
            rc = run_curve(em, params, h, periods, curve_res, plot);
        } else if (ss->parsed()) {
            cfg["subcommand"] = "sweep";
            cfg["h_min"] = h_min;
            cfg["h_max"] = h_max;
            cfg["points"] = points;
            cfg["jobs"] = jobs;
            em.config = cfg;
            rc = run_sweep(em, params, h_min, h_max, points, jobs);
        }
        em.finish();
        return rc;
    } catch (const IoError& e) {
        json err = {{"error", e.kind()}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const Error& e) {
        json err = {{"error", e.kind()}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err = {{"error", "error"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
