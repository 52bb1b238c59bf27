#include "adsqnm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <json.hpp>

#include "adsqnm/io.hpp"

namespace adsqnm {

namespace fs = std::filesystem;

namespace {

struct RunState {
    HorizonData horizon;
    double delta = 0.0;
    std::shared_ptr<DiscreteOperator> op, op_fine;
    std::shared_ptr<Spectrum> spectrum;
    std::vector<Quasimode> quasimode_list;
    std::shared_ptr<ResidualSequence> sequence;
    std::shared_ptr<ResolventScan> scan;
    std::vector<FlowTrajectory> trajectories;
};

// dependency-ordered stage list with prerequisites included
std::vector<std::string> resolve_stages(const std::vector<std::string>& requested) {
    const std::vector<std::string> order = {"horizon", "assemble", "solve",
                                            "scan",    "quasimodes", "match",
                                            "verify",  "flow",       "plot"};
    const std::map<std::string, std::vector<std::string>> deps = {
        {"horizon", {}},
        {"assemble", {"horizon"}},
        {"solve", {"assemble"}},
        {"scan", {"assemble"}},
        {"quasimodes", {"horizon"}},
        {"match", {"solve", "quasimodes"}},
        {"verify", {"horizon"}},
        {"flow", {"horizon"}},
        {"plot", {}},
    };
    std::vector<std::string> wanted = requested;
    bool grew = true;
    while (grew) {
        grew = false;
        for (auto& st : std::vector<std::string>(wanted)) {
            for (auto& d : deps.at(st)) {
                if (std::find(wanted.begin(), wanted.end(), d) == wanted.end()) {
                    wanted.push_back(d);
                    grew = true;
                }
            }
        }
    }
    std::vector<std::string> out;
    for (auto& st : order)
        if (std::find(wanted.begin(), wanted.end(), st) != wanted.end()) out.push_back(st);
    return out;
}

void stage_horizon(const RunConfig& cfg, RunState& st, const std::string& dir,
                   std::vector<std::string>& outputs) {
    st.horizon = find_horizon(cfg.params);
    double delta = cfg.delta_factor * st.horizon.r_plus;
    // shrink if the validation fails at the configured factor
    st.delta = std::min(delta, default_delta(cfg.params, st.horizon));

    nlohmann::json j;
    j["r_plus"] = st.horizon.r_plus;
    j["surface_gravity"] = st.horizon.surface_gravity;
    j["killing_coeff"] = st.horizon.killing_coeff;
    j["hawking_reall"] = st.horizon.hawking_reall;
    j["delta"] = st.delta;
    std::ofstream f(dir + "/horizon.json");
    f << j.dump(2) << "\n";
    outputs.push_back(dir + "/horizon.json");
}

void stage_assemble(const RunConfig& cfg, RunState& st, const std::string& dir,
                    std::vector<std::string>& outputs) {
    double r_inner = st.horizon.r_plus - st.delta;
    auto grid = build_grid(cfg.params, cfg.solve.n_radial, cfg.solve.n_angular, r_inner);
    st.op = std::make_shared<DiscreteOperator>(
        assemble(cfg.params, grid, cfg.bc, cfg.params.k));
    int nr_fine = int(std::lround(cfg.solve.n_radial * cfg.solve.fine_factor));
    auto grid_fine = build_grid(cfg.params, nr_fine, cfg.solve.n_angular, r_inner);
    st.op_fine = std::make_shared<DiscreteOperator>(
        assemble(cfg.params, grid_fine, cfg.bc, cfg.params.k));
    if (cfg.dump_operator_binary) {
        dump_operator(dir + "/operator.bin", *st.op);
        outputs.push_back(dir + "/operator.bin");
    }
}

void stage_solve(const RunConfig& cfg, RunState& st, const std::string& dir,
                 std::vector<std::string>& outputs) {
    SearchRegion region{cfg.solve.re_min, cfg.solve.re_max, cfg.solve.im_min,
                        cfg.solve.im_max};
    st.spectrum = std::make_shared<Spectrum>(solve_qnf(*st.op, region, *st.op_fine));
    write_qnf_csv(dir + "/qnf.csv", *st.spectrum);
    outputs.push_back(dir + "/qnf.csv");
}

void stage_scan(const RunConfig& cfg, RunState& st, const std::string& dir,
                std::vector<std::string>& outputs) {
    double r_inner = st.horizon.r_plus - st.delta;
    auto grid = build_grid(cfg.params, cfg.scan.n_radial, cfg.scan.n_angular, r_inner);
    auto op = assemble(cfg.params, grid, cfg.bc, cfg.params.k);
    ScanSpec sp;
    sp.re_min = cfg.scan.re_min;
    sp.re_max = cfg.scan.re_max;
    sp.c_minus = cfg.scan.c_minus;
    sp.c_plus = cfg.scan.c_plus;
    sp.h = cfg.scan.h;
    sp.n_re = cfg.scan.n_re;
    sp.n_im = cfg.scan.n_im;
    sp.candidate_threshold = cfg.scan.threshold;
    st.scan = std::make_shared<ResolventScan>(scan_rectangle(op, sp, cfg.workers));
    write_scan_csv(dir + "/scan.csv", *st.scan);
    outputs.push_back(dir + "/scan.csv");
}

void stage_quasimodes(const RunConfig& cfg, RunState& st, const std::string& dir,
                      std::vector<std::string>& outputs) {
    double rp = st.horizon.r_plus;
    double r1 = cfg.quasimodes.r1 > 0.0 ? cfg.quasimodes.r1
                                        : default_r1(cfg.params, st.horizon);
    double width = cfg.quasimodes.transition_factor * rp;

    auto grid_t =
        build_grid(cfg.params, cfg.quasimodes.n_radial, cfg.quasimodes.n_angular, r1);
    AssemblyOptions opts;
    opts.wall_at_inner = true;
    BlackHoleParams p0 = cfg.params;
    p0.k = 0;  // quasimodes are axisymmetric
    auto op_t = assemble(p0, grid_t, cfg.bc, 0, opts);

    auto grid_f = build_grid(cfg.params, cfg.quasimodes.n_radial,
                             cfg.quasimodes.n_angular, rp - st.delta);
    auto op_f = assemble(p0, grid_f, cfg.bc, 0);

    st.sequence = std::make_shared<ResidualSequence>(
        residual_sequence(op_f, op_t, cfg.quasimodes.ell_min, cfg.quasimodes.ell_max,
                          r1, width, &st.quasimode_list));
    write_quasimodes_csv(dir + "/quasimodes.csv", st.quasimode_list);
    outputs.push_back(dir + "/quasimodes.csv");
}

void stage_match(const RunConfig& cfg, RunState& st, const std::string& dir,
                 std::vector<std::string>& outputs) {
    if (!st.spectrum) throw StageFailure("match", "no spectrum available");
    MatchWindow win{cfg.match.c_match, cfg.match.gamma};
    std::vector<std::tuple<int, double, PoleMatch>> rows;
    for (auto& q : st.quasimode_list) {
        PoleMatch m = match_pole(*st.spectrum, q.lambda_sharp, q.residual, win);
        rows.emplace_back(q.ell, q.residual, m);
    }
    write_match_csv(dir + "/match.csv", rows);
    outputs.push_back(dir + "/match.csv");
}

void stage_verify(const RunConfig& cfg, RunState& st, const std::string& dir,
                  std::vector<std::string>& outputs) {
    // energy identity refinement pair on the exterior slice with the
    // manufactured Dirichlet mode u = r^{nu-3/2} exp(-r), lambda = 2 + i
    Complex lambda(2.0, 1.0);
    std::vector<std::pair<int, FluxReport>> pairs;
    for (int n : {cfg.scan.n_radial, 2 * cfg.scan.n_radial}) {
        auto grid = build_grid(cfg.params, n, cfg.scan.n_angular, st.horizon.r_plus);
        auto op = assemble(cfg.params, grid, cfg.bc, cfg.params.k);
        VectorXcd w(op.size());
        for (int i = 0; i < grid->n_radial; ++i)
            for (int j = 0; j < grid->n_angular; ++j)
                w[grid->index(i, j)] =
                    (i == 0) ? 0.0 : std::exp(-1.0 / grid->s[i]);
        pairs.emplace_back(n, verify_identity(op, w, lambda, KillingChoice::K));
    }
    write_energy_csv(dir + "/energy.csv", pairs);
    outputs.push_back(dir + "/energy.csv");

    std::vector<std::tuple<int, Complex, IndicialRoots>> irows;
    for (double x : {1.0, 2.0, 5.0, 10.0})
        irows.emplace_back(cfg.params.k, Complex(x, 0.0),
                           indicial_roots(cfg.params, st.horizon, Complex(x, 0.0),
                                          cfg.params.k));
    write_indicial_csv(dir + "/indicial.csv", irows);
    outputs.push_back(dir + "/indicial.csv");
}

void stage_flow(const RunConfig& cfg, RunState& st, const std::string& dir,
                std::vector<std::string>& outputs) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uz(cfg.flow.z_min, cfg.flow.z_max);
    std::uniform_real_distribution<double> uth(0.35 * PI, 0.65 * PI);
    std::uniform_real_distribution<double> uxi(-1.5, 1.5);
    std::uniform_real_distribution<double> ur(-0.9, 0.9);

    double rp = st.horizon.r_plus;
    FlowOptions fopts;
    fopts.t_max = cfg.flow.t_max;
    st.trajectories.clear();
    int attempts = 0;
    while (static_cast<int>(st.trajectories.size()) < cfg.flow.n_seeds &&
           attempts < 50 * cfg.flow.n_seeds) {
        ++attempts;
        double r = rp + ur(rng) * st.delta;
        double th = uth(rng), z = uz(rng);
        double xth = uxi(rng), xph = uxi(rng);
        auto roots = characteristic_xi_r(cfg.params, r, th, xth, xph, z);
        for (double xr : roots) {
            PhasePoint pt{r, th, 0.0, xr, xth, xph, z};
            try {
                if (classify(cfg.params, pt) != CharClass::SigmaPlus) continue;
                st.trajectories.push_back(
                    integrate(cfg.params, st.horizon, pt, st.delta, fopts));
            } catch (const Error&) {
                continue;
            }
            break;
        }
    }
    if (st.trajectories.empty()) throw StageFailure("flow", "no characteristic seeds");
    write_trajectory_csv(dir + "/trajectory.csv", st.trajectories.front());
    outputs.push_back(dir + "/trajectory.csv");
    plot_flow_portrait_svg(dir + "/flow_portrait.svg", st.trajectories, rp);
    outputs.push_back(dir + "/flow_portrait.svg");
}

void stage_plot(const RunConfig&, RunState& st, const std::string& dir,
                std::vector<std::string>& outputs) {
    if (st.spectrum) {
        std::vector<double> qfreqs;
        for (auto& q : st.quasimode_list) qfreqs.push_back(q.lambda_sharp);
        plot_spectrum_svg(dir + "/spectrum.svg", *st.spectrum, qfreqs);
        outputs.push_back(dir + "/spectrum.svg");
    }
    if (st.sequence) {
        plot_residual_trend_svg(dir + "/residual_trend.svg", *st.sequence);
        outputs.push_back(dir + "/residual_trend.svg");
    }
    if (st.scan) {
        plot_scan_heatmap_svg(dir + "/scan_heatmap.svg", *st.scan);
        outputs.push_back(dir + "/scan_heatmap.svg");
    }
}

}  // namespace

RunManifest run_pipeline(const RunConfig& cfg, uint64_t config_hash, bool verbose) {
    std::string dir = cfg.output_dir;
    if (const char* env = std::getenv("ADSQNM_OUT")) dir = env;
    fs::create_directories(dir);

    RunManifest man;
    man.config_hash = config_hash;
    man.seed = cfg.seed;
    man.output_dir = dir;

    RunState st;
    auto stages = resolve_stages(cfg.pipeline);
    for (auto& name : stages) {
        auto t0 = std::chrono::steady_clock::now();
        StageRecord rec;
        rec.name = name;
        try {
            if (verbose) std::cerr << "[adsqnm] stage " << name << "...\n";
            if (name == "horizon") stage_horizon(cfg, st, dir, man.outputs);
            else if (name == "assemble") stage_assemble(cfg, st, dir, man.outputs);
            else if (name == "solve") stage_solve(cfg, st, dir, man.outputs);
            else if (name == "scan") stage_scan(cfg, st, dir, man.outputs);
            else if (name == "quasimodes") stage_quasimodes(cfg, st, dir, man.outputs);
            else if (name == "match") stage_match(cfg, st, dir, man.outputs);
            else if (name == "verify") stage_verify(cfg, st, dir, man.outputs);
            else if (name == "flow") stage_flow(cfg, st, dir, man.outputs);
            else if (name == "plot") stage_plot(cfg, st, dir, man.outputs);
            rec.status = "ok";
        } catch (const std::exception& e) {
            rec.status = "failed";
            rec.seconds = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            man.stages.push_back(rec);
            if (name == "plot") {
                man.partial_success = true;  // plots are optional
                if (verbose) std::cerr << "[adsqnm] optional stage plot failed\n";
                continue;
            }
            man.write(dir + "/manifest.json");
            throw StageFailure(name, e.what());
        }
        rec.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        man.stages.push_back(rec);
    }

    for (auto& f : man.outputs) {
        std::error_code ec;
        auto sz = fs::file_size(f, ec);
        if (ec || sz == 0)
            throw StageFailure("manifest", "output missing or empty: " + f);
    }
    man.write(dir + "/manifest.json");
    return man;
}

void plot_from_outputs(const std::string& manifest_path, const std::string& kind) {
    std::ifstream mf(manifest_path);
    if (!mf) throw MissingStageOutputError("cannot open manifest: " + manifest_path);
    nlohmann::json j;
    mf >> j;
    std::string dir = j.value("output_dir", ".");

    auto need = [&](const std::string& file) {
        std::ifstream f(dir + "/" + file);
        if (!f)
            throw MissingStageOutputError("plot '" + kind + "' requires " + dir + "/" +
                                          file);
        return f;
    };
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                cells.push_back(cur);
                cur.clear();
            } else
                cur += ch;
        }
        cells.push_back(cur);
        return cells;
    };

    if (kind == "spectrum") {
        auto f = need("qnf.csv");
        std::string line;
        std::getline(f, line);
        Spectrum spec;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            auto c = split(line);
            SpectrumEntry e;
            e.ell_hint = std::stoi(c[0]);
            spec.k = std::stoi(c[1]);
            e.lambda = Complex(std::stod(c[2]), std::stod(c[3]));
            e.residual = std::stod(c[4]);
            e.converged = c[5] == "1";
            spec.entries.push_back(e);
        }
        plot_spectrum_svg(dir + "/spectrum.svg", spec, {});
    } else if (kind == "residual_trend") {
        auto f = need("quasimodes.csv");
        std::string line;
        std::getline(f, line);
        ResidualSequence seq;
        std::vector<double> xs, ys;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            auto c = split(line);
            ResidualRow r{std::stoi(c[0]), std::stod(c[1]), std::stod(c[2])};
            seq.rows.push_back(r);
            xs.push_back(r.ell);
            ys.push_back(std::log(std::max(r.residual, 1e-300)));
        }
        if (xs.size() >= 2) {
            double n = xs.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sx += xs[i];
                sy += ys[i];
                sxx += xs[i] * xs[i];
                sxy += xs[i] * ys[i];
            }
            seq.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            seq.intercept = (sy - seq.slope * sx) / n;
        }
        plot_residual_trend_svg(dir + "/residual_trend.svg", seq);
    } else if (kind == "scan_heatmap") {
        auto f = need("scan.csv");
        std::string line;
        std::getline(f, line);
        ResolventScan scan;
        std::vector<double> res, ims;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            auto c = split(line);
            scan.z.push_back(Complex(std::stod(c[0]), std::stod(c[1])));
            scan.value.push_back(std::stod(c[2]));
        }
        // reconstruct the rectangle from the samples
        double re_lo = 1e300, re_hi = -1e300, im_lo = 1e300, im_hi = -1e300;
        std::vector<double> uniq_re;
        for (auto z : scan.z) {
            re_lo = std::min(re_lo, z.real());
            re_hi = std::max(re_hi, z.real());
            im_lo = std::min(im_lo, z.imag());
            im_hi = std::max(im_hi, z.imag());
            bool seen = false;
            for (double u : uniq_re)
                if (u == z.real()) seen = true;
            if (!seen) uniq_re.push_back(z.real());
        }
        scan.spec.re_min = re_lo;
        scan.spec.re_max = re_hi;
        scan.spec.h = 1.0;
        scan.spec.c_minus = im_lo;
        scan.spec.c_plus = im_hi;
        scan.spec.n_re = static_cast<int>(uniq_re.size());
        scan.spec.n_im = static_cast<int>(scan.z.size() / std::max<std::size_t>(1, uniq_re.size()));
        plot_scan_heatmap_svg(dir + "/scan_heatmap.svg", scan);
    } else if (kind == "flow_portrait") {
        auto f = need("trajectory.csv");
        std::string line;
        std::getline(f, line);
        FlowTrajectory tr;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            auto c = split(line);
            FlowSample s;
            s.t = std::stod(c[0]);
            s.point.r = std::stod(c[1]);
            s.point.theta = std::stod(c[2]);
            s.point.xi_r = std::stod(c[3]);
            s.point.xi_theta = std::stod(c[4]);
            s.point.xi_phi = std::stod(c[5]);
            s.p_value = std::stod(c[6]);
            double xin = std::sqrt(s.point.xi_r * s.point.xi_r +
                                   s.point.xi_theta * s.point.xi_theta +
                                   s.point.xi_phi * s.point.xi_phi);
            s.fiber_scale = 1.0 / std::sqrt(1.0 + xin * xin);
            tr.samples.push_back(s);
        }
        // r+ is not recorded in the csv; read it from horizon.json if present
        double rp = 1.0;
        std::ifstream hf(dir + "/horizon.json");
        if (hf) {
            nlohmann::json hj;
            hf >> hj;
            rp = hj.value("r_plus", 1.0);
        }
        plot_flow_portrait_svg(dir + "/flow_portrait.svg", {tr}, rp);
    } else {
        throw Error("unknown plot kind: " + kind);
    }
}

}  // namespace adsqnm
