#include "relaysim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "relaysim/annealer.hpp"
#include "relaysim/csv.hpp"
#include "relaysim/perf_metrics.hpp"

namespace relaysim {

namespace {

struct CommonArgs {
    std::string scenario;
    std::string out = "out";
    std::uint64_t seed = 1;
    std::string weighting = "paper";
    bool small_cell = false;
};

struct SaArgs {
    int nrn = 1;
    double dmax = std::numeric_limits<double>::infinity();
    double dmax_rel = 0.0;  // > 0: dmax = dmax_rel * D0
    std::string penalty = "exterior";
    double alpha_c = 1.0;
    int steps = 45;
    int proposals = 0;
    int restarts = 4;
    double t0 = 0.0;
    double h = 0.9;
};

std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    char c;
    while (in.get(c)) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ull;
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string provenance(const CommonArgs& a, const std::string& extra) {
    std::ostringstream os;
    os << "# relaysim format=1\n";
    os << "# scenario=" << a.scenario << " hash=" << file_hash_hex(a.scenario) << "\n";
    os << "# seed=" << a.seed << " weighting=" << a.weighting
       << " small_cell=" << (a.small_cell ? 1 : 0) << "\n";
    if (!extra.empty()) os << "# " << extra << "\n";
    return os.str();
}

EvalOptions make_opts(const CommonArgs& a) {
    EvalOptions o;
    o.weighting = a.weighting == "traffic_share" ? DelayWeighting::TrafficShare
                                                 : DelayWeighting::Paper;
    o.small_cell = a.small_cell;
    return o;
}

PenaltyMode parse_penalty(const std::string& s) {
    if (s == "exterior") return PenaltyMode::ExteriorAdaptive;
    if (s == "interior") return PenaltyMode::InteriorReject;
    if (s == "static") return PenaltyMode::StaticConstant;
    throw CLI::ValidationError("--penalty", "expected exterior|interior|static");
}

int snap_to_grid(const RangeGrid& g, double value, const char* what) {
    const int idx = static_cast<int>(std::llround((value - g.min) / g.step));
    if (idx < 0 || idx >= g.count() || std::fabs(g.value(idx) - value) > 1e-9)
        throw std::runtime_error(std::string(what) + ": value " + fmt9(value) + " is off-grid");
    return idx;
}

std::string config_json(const Workspace& ws, const Configuration& x) {
    nlohmann::json j;
    j["rn_sites"] = x.rn_sites;
    auto& pos = j["rn_positions_m"] = nlohmann::json::array();
    for (int s : x.rn_sites) pos.push_back({ws.sites[s].x, ws.sites[s].y});
    j["p_enb_dbm"] = ws.sc.target_dbm.value(x.p_enb_idx);
    j["p_rn_dbm"] = ws.sc.target_dbm.value(x.p_rn_idx);
    j["bias_db"] = ws.sc.bias_db.value(x.bias_idx);
    return j.dump(2) + "\n";
}

std::string trace_csv(const CommonArgs& a, const std::string& extra,
                      const std::vector<TraceRow>& trace) {
    std::ostringstream os;
    os << provenance(a, extra);
    os << "restart,step,temperature,F,pi,d_c,penalty,acceptance,feasible,best_pi\n";
    for (const TraceRow& r : trace) {
        os << r.restart << ',' << r.step << ',' << fmt9(r.temperature) << ',' << fmt9(r.energy)
           << ',' << fmt9(r.pi) << ',' << fmt9(r.dc) << ',' << fmt9(r.penalty) << ','
           << fmt9(r.acceptance) << ',' << (r.feasible ? 1 : 0) << ',' << fmt9(r.best_pi) << "\n";
    }
    return os.str();
}

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

// full station table + summary row
std::string eval_report_csv(const CommonArgs& a, const Workspace& ws, const Configuration& x,
                            const EvalReport& rep) {
    const auto act = active_stations(ws, x);
    EvalContext ctx = make_context(ws, x, a.small_cell);
    std::ostringstream os;
    os << provenance(a, "");
    os << "row,id,kind,cell,pos_x,pos_y,area_m2,phi_mass,rho,rho_bl,delay_s,backhaul_delay_s,"
          "pi_j_per_bit,d_c_s,feasible\n";
    for (std::size_t k = 0; k < act.size(); ++k) {
        os << "station," << act[k].id << ',' << (act[k].kind == StationKind::Enb ? "enb" : "rn")
           << ',' << act[k].cell << ',' << fmt9(act[k].pos.x) << ',' << fmt9(act[k].pos.y) << ','
           << fmt9(ctx.assoc.area[k]) << ',' << fmt9(ctx.assoc.phi_mass[k]) << ','
           << fmt9(rep.loads.rho.empty() ? 0.0 : rep.loads.rho[k]) << ','
           << fmt9(rep.loads.rho_bl.empty() ? 0.0 : rep.loads.rho_bl[k]) << ','
           << fmt9(rep.d_station.empty() ? 0.0 : rep.d_station[k]) << ','
           << fmt9(rep.d_backhaul.empty() ? 0.0 : rep.d_backhaul[k]) << ",,,\n";
    }
    os << "summary,,,,,,,,,,,," << fmt9(rep.pi) << ',' << fmt9(rep.d_c) << ','
       << (rep.feasible ? 1 : 0) << "\n";
    return os.str();
}

int cmd_eval(const CommonArgs& a, int nrn, const std::string& sites_csv, double pbar_enb,
             double pbar_rn, double bias) {
    const Workspace ws = build_workspace(load_scenario(a.scenario));
    Configuration x;
    if (!sites_csv.empty()) {
        std::istringstream ss(sites_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) x.rn_sites.push_back(std::stoi(tok));
    } else if (nrn > 0) {
        // deterministic default placement: first nrn candidate sites
        for (int i = 0; i < nrn; ++i) x.rn_sites.push_back(i);
    }
    x.p_enb_idx = snap_to_grid(ws.sc.target_dbm, pbar_enb, "--pbar-enb");
    x.p_rn_idx = snap_to_grid(ws.sc.target_dbm, pbar_rn, "--pbar-rn");
    x.bias_idx = snap_to_grid(ws.sc.bias_db, bias, "--bias");
    validate_configuration(ws, x);

    EvalOptions opts = make_opts(a);
    const EvalReport rep = evaluate(ws, x, opts);
    ensure_dir(a.out);
    write_file_atomic(a.out + "/eval.csv", eval_report_csv(a, ws, x, rep));
    if (!rep.feasible) {
        std::cerr << "infeasible: fixed point "
                  << (rep.loads.converged ? "converged" : "did not converge") << ", stable="
                  << rep.loads.stable << "\n";
        return 2;
    }
    std::cout << "pi=" << fmt9(rep.pi) << " J/bit  d_c=" << fmt9(rep.d_c) << " s  ("
              << rep.weighting_name << ")\n";
    return 0;
}

struct OptimizeOutcome {
    AnnealResult result;
    Baseline base;
    double dmax = 0.0;
};

OptimizeOutcome optimize_once(const Workspace& ws, const CommonArgs& a, const SaArgs& s,
                              const CachedEvaluator& eval) {
    OptimizeOutcome out;
    out.base = enb_only_baseline(ws, std::cref(eval));
    if (!out.base.found) throw std::runtime_error("baseline infeasible: scenario overloaded");

    out.dmax = s.dmax_rel > 0.0 ? s.dmax_rel * out.base.dc : s.dmax;

    PenaltyParams pp;
    pp.d_max = out.dmax;
    pp.alpha_c = s.alpha_c;
    pp.mode = parse_penalty(s.penalty);

    SaSchedule sch;
    sch.t0 = s.t0;
    sch.h = s.h;
    sch.steps = s.steps;
    sch.proposals = s.proposals;
    sch.restarts = s.restarts;
    sch.seed = a.seed;

    out.result = anneal(ws, s.nrn, pp, sch, std::cref(eval));
    return out;
}

std::string summary_csv(const CommonArgs& a, const OptimizeOutcome& o, const std::string& extra) {
    std::ostringstream os;
    os << provenance(a, extra);
    os << "pi0,d0,dmax,dmax_over_d0,pi_star,dc_star,pi_ratio,feasible,evaluations,t0\n";
    const bool ok = o.result.found_feasible;
    os << fmt9(o.base.pi) << ',' << fmt9(o.base.dc) << ',' << fmt9(o.dmax) << ','
       << fmt9(o.dmax / o.base.dc) << ',' << fmt9(o.result.best_pi) << ','
       << fmt9(o.result.best_dc) << ',' << fmt9(ok ? o.result.best_pi / o.base.pi : 0.0) << ','
       << (ok ? 1 : 0) << ',' << o.result.evaluations << ',' << fmt9(o.result.t0_used) << "\n";
    return os.str();
}

int cmd_optimize(const CommonArgs& a, const SaArgs& s) {
    const Workspace ws = build_workspace(load_scenario(a.scenario));
    const CachedEvaluator eval(ws, make_opts(a));
    const OptimizeOutcome o = optimize_once(ws, a, s, eval);

    ensure_dir(a.out);
    std::ostringstream extra;
    extra << "nrn=" << s.nrn << " dmax=" << fmt9(o.dmax) << " penalty=" << s.penalty
          << " alpha_c=" << fmt9(s.alpha_c) << " steps=" << s.steps
          << " proposals=" << s.proposals << " restarts=" << s.restarts;
    write_file_atomic(a.out + "/trace.csv", trace_csv(a, extra.str(), o.result.trace));
    write_file_atomic(a.out + "/summary.csv", summary_csv(a, o, extra.str()));
    if (o.result.found_feasible)
        write_file_atomic(a.out + "/best_config.json", config_json(ws, o.result.best));

    if (!o.result.found_feasible) {
        std::cerr << "no feasible configuration found (dmax=" << fmt9(o.dmax) << " s)\n";
        return 2;
    }
    std::cout << "pi*=" << fmt9(o.result.best_pi) << " J/bit  pi*/pi0="
              << fmt9(o.result.best_pi / o.base.pi) << "  d_c=" << fmt9(o.result.best_dc)
              << " s  evals=" << o.result.evaluations << "\n";
    return 0;
}

int cmd_sweep(const CommonArgs& a, const SaArgs& s, const std::string& axis,
              const std::vector<double>& values, bool relative) {
    if (values.empty()) throw std::runtime_error("sweep: no axis values given");
    const Scenario sc = load_scenario(a.scenario);

    struct PointResult {
        double value = 0.0;
        OptimizeOutcome o;
        bool ok = false;
    };

    auto run_point = [&](double v) {
        PointResult pr;
        pr.value = v;
        Scenario sc_pt = sc;
        SaArgs s_pt = s;
        if (axis == "dmax") {
            if (relative) s_pt.dmax_rel = v;
            else { s_pt.dmax = v; s_pt.dmax_rel = 0.0; }
        } else if (axis == "omega") {
            sc_pt.traffic_mean = v;
        } else if (axis == "nrn") {
            s_pt.nrn = static_cast<int>(std::llround(v));
        } else {
            throw std::runtime_error("sweep: axis must be dmax|omega|nrn");
        }
        const Workspace ws = build_workspace(sc_pt);
        const CachedEvaluator eval(ws, make_opts(a));
        pr.o = optimize_once(ws, a, s_pt, eval);
        pr.ok = pr.o.result.found_feasible;
        return pr;
    };

    std::vector<std::future<PointResult>> jobs;
    for (double v : values)
        jobs.push_back(std::async(std::launch::async, run_point, v));

    ensure_dir(a.out);
    std::ostringstream os, extra;
    extra << "axis=" << axis << " penalty=" << s.penalty << " nrn=" << s.nrn
          << " relative=" << (relative ? 1 : 0);
    os << provenance(a, extra.str());
    os << "axis_value,pi0,d0,dmax,pi_star,pi_ratio,dc_star,feasible\n";
    bool any_feasible = false;
    std::vector<PointResult> results;
    for (auto& j : jobs) results.push_back(j.get());
    for (const PointResult& pr : results) {
        any_feasible = any_feasible || pr.ok;
        os << fmt9(pr.value) << ',' << fmt9(pr.o.base.pi) << ',' << fmt9(pr.o.base.dc) << ','
           << fmt9(pr.o.dmax) << ',' << fmt9(pr.o.result.best_pi) << ','
           << fmt9(pr.ok ? pr.o.result.best_pi / pr.o.base.pi : 0.0) << ','
           << fmt9(pr.o.result.best_dc) << ',' << (pr.ok ? 1 : 0) << "\n";
    }
    write_file_atomic(a.out + "/sweep.csv", os.str());

    std::ostringstream plot;
    plot << provenance(a, extra.str());
    plot << "plot: energy-delay trade-off\n";
    plot << "x: " << (axis == "dmax" ? (relative ? "dmax_over_d0" : "dmax_s") : axis) << "\n";
    plot << "y: pi_ratio (Pi*/Pi0)\n";
    plot << "series: nrn=" << s.nrn << " penalty=" << s.penalty
         << (a.small_cell ? " small-cell" : " relay") << "\n";
    if (!results.empty())
        plot << "normalization: pi0=" << fmt9(results.front().o.base.pi)
             << " J/bit, d0=" << fmt9(results.front().o.base.dc) << " s\n";
    plot << "source: sweep.csv\n";
    write_file_atomic(a.out + "/plot.txt", plot.str());

    return any_feasible ? 0 : 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    std::vector<std::string> storage = args;
    storage.insert(storage.begin(), "relaysim");
    for (auto& s : storage) argv.push_back(s.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, char** argv) {
    CLI::App app{"uplink relay-network energy/delay evaluation and optimization"};
    app.require_subcommand(1);

    CommonArgs a;
    SaArgs s;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", a.scenario, "scenario file")->required();
        cmd->add_option("--out", a.out, "output directory");
        cmd->add_option("--seed", a.seed, "run seed");
        cmd->add_option("--weighting", a.weighting, "paper|traffic_share")
            ->check(CLI::IsMember({"paper", "traffic_share"}));
        cmd->add_flag("--small-cell", a.small_cell, "beta->0, no backhaul (wired small cells)");
    };
    auto add_sa = [&](CLI::App* cmd) {
        cmd->add_option("--nrn", s.nrn, "number of RNs in cell c");
        cmd->add_option("--dmax", s.dmax, "delay constraint, seconds");
        cmd->add_option("--dmax-rel", s.dmax_rel, "delay constraint as a multiple of D0");
        cmd->add_option("--penalty", s.penalty, "exterior|interior|static")
            ->check(CLI::IsMember({"exterior", "interior", "static"}));
        cmd->add_option("--alpha-c", s.alpha_c, "penalty growth constant");
        cmd->add_option("--steps", s.steps, "temperature steps");
        cmd->add_option("--proposals", s.proposals, "proposals per step (0: auto)");
        cmd->add_option("--restarts", s.restarts, "independent SA restarts");
        cmd->add_option("--t0", s.t0, "initial temperature (0: dichotomic search)");
        cmd->add_option("--h", s.h, "geometric decay factor");
    };

    // eval
    int nrn_eval = 0;
    std::string sites;
    double pbar_enb = std::numeric_limits<double>::quiet_NaN();
    double pbar_rn = std::numeric_limits<double>::quiet_NaN();
    double bias = std::numeric_limits<double>::quiet_NaN();
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate one configuration");
    add_common(eval_cmd);
    eval_cmd->add_option("--nrn", nrn_eval, "RN count (default placement)");
    eval_cmd->add_option("--sites", sites, "explicit candidate-site indices, comma separated");
    eval_cmd->add_option("--pbar-enb", pbar_enb, "eNB target received power, dBm");
    eval_cmd->add_option("--pbar-rn", pbar_rn, "RN target received power, dBm");
    eval_cmd->add_option("--bias", bias, "RN association bias, dB");

    CLI::App* opt_cmd = app.add_subcommand("optimize", "constrained SA optimization");
    add_common(opt_cmd);
    add_sa(opt_cmd);

    std::string axis = "dmax";
    std::vector<double> values;
    bool relative = false;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "one optimization per axis value");
    add_common(sweep_cmd);
    add_sa(sweep_cmd);
    sweep_cmd->add_option("--axis", axis, "dmax|omega|nrn")
        ->check(CLI::IsMember({"dmax", "omega", "nrn"}));
    sweep_cmd->add_option("--values", values, "axis values")->required();
    sweep_cmd->add_flag("--relative", relative, "dmax values are multiples of D0");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (eval_cmd->parsed()) {
            const Scenario sc = load_scenario(a.scenario);
            if (std::isnan(pbar_enb)) pbar_enb = sc.target_dbm.value(sc.target_dbm.count() / 2);
            if (std::isnan(pbar_rn)) pbar_rn = sc.target_dbm.value(sc.target_dbm.count() / 2);
            if (std::isnan(bias)) bias = sc.bias_db.value(0);
            return cmd_eval(a, nrn_eval, sites, pbar_enb, pbar_rn, bias);
        }
        if (opt_cmd->parsed()) return cmd_optimize(a, s);
        if (sweep_cmd->parsed()) return cmd_sweep(a, s, axis, values, relative);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace relaysim
