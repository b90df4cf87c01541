#include "relaysim/load_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relaysim/rng.hpp"

namespace relaysim {

double EvalContext::signal_mean(int k, std::size_t pixel) const {
    const double target = act[k].kind == StationKind::Enb ? p_enb_w : p_rn_w;
    if (!tx.clamped[pixel]) return target;
    return ws->sc.tmax_w * ws->gain_of(k, act, pixel);
}

EvalContext make_context(const Workspace& ws, const Configuration& x, bool small_cell) {
    EvalContext ctx;
    ctx.ws = &ws;
    ctx.x = x;
    ctx.small_cell = small_cell;
    ctx.act = active_stations(ws, x);
    ctx.K = static_cast<int>(ctx.act.size());
    ctx.assoc = build_association(ws, x, ctx.act);
    ctx.tx = fcpc_power(ws, x, ctx.assoc);
    ctx.p_enb_w = dbm_to_w(ws.sc.target_dbm.value(x.p_enb_idx));
    ctx.p_rn_w = dbm_to_w(ws.sc.target_dbm.value(x.p_rn_idx));

    const std::size_t P = ws.grid.size();
    const double da = ws.grid.pixel_area();
    ctx.clamped_px.assign(ctx.K, {});
    ctx.unclamped_phimass.assign(ctx.K, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
        const int k = ctx.assoc.server[p];
        if (ctx.tx.clamped[p]) ctx.clamped_px[k].push_back(static_cast<std::uint32_t>(p));
        else ctx.unclamped_phimass[k] += ws.phi[p] * da;
    }

    // Y_jk / H_jk: power received at k from the UE population of j, weighted
    // by phi/Phi_j (the App.-A load-shape approximation)
    ctx.Y.assign(static_cast<std::size_t>(ctx.K) * ctx.K, 0.0);
    ctx.H.assign(static_cast<std::size_t>(ctx.K) * ctx.K, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
        const int j = ctx.assoc.server[p];
        if (ctx.assoc.phi_mass[j] <= 0.0) continue;
        const double w = ws.phi[p] * da / ctx.assoc.phi_mass[j];
        const double t = ctx.tx.power_w[p];
        for (int k = 0; k < ctx.K; ++k) {
            const double rx = t * ws.gain_of(k, ctx.act, p);
            ctx.Y[static_cast<std::size_t>(k) * ctx.K + j] += w * rx;
            ctx.H[static_cast<std::size_t>(k) * ctx.K + j] += w * rx * rx;
        }
    }

    // backhaul topology: one entry per eNB, RNs attached by donor index
    for (int k = 0; k < ctx.K; ++k) {
        if (ctx.act[k].kind != StationKind::Enb) continue;
        EvalContext::Cell cell;
        cell.enb = k;
        for (int r = 0; r < ctx.K; ++r)
            if (ctx.act[r].kind == StationKind::Rn && ctx.act[r].donor_index == k)
                cell.rns.push_back(r);
        ctx.cells.push_back(cell);
    }
    return ctx;
}

InterferenceMoments interference_moments(const EvalContext& ctx, const std::vector<double>& loads,
                                         int k) {
    std::vector<double> y(ctx.K), h(ctx.K);
    for (int j = 0; j < ctx.K; ++j) {
        y[j] = ctx.Y[static_cast<std::size_t>(k) * ctx.K + j];
        h[j] = ctx.H[static_cast<std::size_t>(k) * ctx.K + j];
    }
    return accumulate_moments(y, h, loads, k);
}

namespace {

// rank profiles of 1/C per received-power group, at fixed interference; the
// station's own load then enters only through sched_rank_mix
struct RankProfiles {
    std::vector<double> unclamped;
    std::vector<std::vector<double>> clamped;  // parallel to ctx.clamped_px[k]
};

RankProfiles station_profiles(const EvalContext& ctx, const InterferenceMoments& im, int k) {
    const Scenario& sc = ctx.ws->sc;
    RankProfiles rp;
    const double target = ctx.act[k].kind == StationKind::Enb ? ctx.p_enb_w : ctx.p_rn_w;
    rp.unclamped =
        inv_capacity_rank_profile(sinr_params(target, im, sc.noise_w), sc.mqs_window, sc.capacity);
    rp.clamped.reserve(ctx.clamped_px[k].size());
    for (std::uint32_t p : ctx.clamped_px[k])
        rp.clamped.push_back(inv_capacity_rank_profile(
            sinr_params(ctx.signal_mean(k, p), im, sc.noise_w), sc.mqs_window, sc.capacity));
    return rp;
}

// collapse the spatial integral into one per-rank aggregate:
// sum over A_k of phi dA * E[1/C] = sched_rank_mix(aggregate, rho_k)
std::vector<double> rank_aggregate(const EvalContext& ctx, const RankProfiles& rp, int k) {
    const double da = ctx.ws->grid.pixel_area();
    std::vector<double> agg(rp.unclamped.size(), 0.0);
    for (std::size_t n = 0; n < agg.size(); ++n)
        agg[n] = ctx.unclamped_phimass[k] * rp.unclamped[n];
    for (std::size_t i = 0; i < ctx.clamped_px[k].size(); ++i) {
        const double w = ctx.ws->phi[ctx.clamped_px[k][i]] * da;
        for (std::size_t n = 0; n < agg.size(); ++n) agg[n] += w * rp.clamped[i][n];
    }
    return agg;
}

double own_tilt(double rho) { return std::clamp(rho, 0.0, 1.0 - 1e-12); }

}  // namespace

StationInvCap station_inv_capacity(const EvalContext& ctx, const std::vector<double>& loads,
                                   int k) {
    const InterferenceMoments im = interference_moments(ctx, loads, k);
    const RankProfiles rp = station_profiles(ctx, im, k);
    const double own = own_tilt(loads[k]);
    StationInvCap q;
    q.unclamped = sched_rank_mix(rp.unclamped, own);
    q.clamped.reserve(rp.clamped.size());
    for (const auto& g : rp.clamped) q.clamped.push_back(sched_rank_mix(g, own));
    return q;
}

double access_load_formula(const EvalContext& ctx, const std::vector<double>& loads, int k) {
    if (ctx.assoc.phi_mass[k] <= 0.0) return 0.0;
    const Scenario& sc = ctx.ws->sc;
    const StationInvCap q = station_inv_capacity(ctx, loads, k);
    const double da = ctx.ws->grid.pixel_area();
    double acc = ctx.unclamped_phimass[k] * q.unclamped;
    for (std::size_t i = 0; i < ctx.clamped_px[k].size(); ++i)
        acc += ctx.ws->phi[ctx.clamped_px[k][i]] * da * q.clamped[i];
    return sc.traffic_mean / (1.0 - ctx.beta()) * acc;
}

double access_load(const EvalContext& ctx, const std::vector<double>& loads, int k) {
    if (ctx.assoc.phi_mass[k] <= 0.0) return 0.0;
    // The load equation carries rho_k on both sides (through the scheduling
    // tilt); F_k is a function of the interfering loads only, with the own
    // load solved self-consistently. The tilt weakens the load as rho grows,
    // so damped iteration converges; a warm start keeps it short.
    const InterferenceMoments im = interference_moments(ctx, loads, k);
    const std::vector<double> agg = rank_aggregate(ctx, station_profiles(ctx, im, k), k);
    const double scale = ctx.ws->sc.traffic_mean / (1.0 - ctx.beta());

    double own = std::min(loads[k], 1.0);
    double v = 0.0;
    for (int it = 0; it < 100; ++it) {
        v = scale * sched_rank_mix(agg, own_tilt(own));
        if (std::fabs(v - own) < 1e-9) return v;
        if (v >= 1.0 && own >= 1.0) return v;  // no stable root below 1
        own = 0.5 * (own + v);
    }
    return v;
}

LoadState fixed_point(const EvalContext& ctx, const FixedPointOptions& opts) {
    LoadState ls;
    std::vector<double> rho(ctx.K, 0.0);
    ls.history.push_back(rho);
    for (int t = 1; t <= opts.max_iter; ++t) {
        std::vector<double> next(ctx.K);
        for (int k = 0; k < ctx.K; ++k) next[k] = access_load(ctx, rho, k);
        ls.history.push_back(next);
        ls.iterations = t;

        bool unstable = false;
        double diff = 0.0;
        for (int k = 0; k < ctx.K; ++k) {
            diff = std::max(diff, std::fabs(next[k] - rho[k]));
            if (next[k] >= 1.0) unstable = true;
        }
        rho = next;
        if (unstable) {
            ls.stable = false;
            break;
        }
        if (diff < opts.tol) {
            ls.converged = true;
            break;
        }
    }
    ls.rho.resize(ctx.K);
    for (int k = 0; k < ctx.K; ++k) ls.rho[k] = std::min(rho[k], 1.0);
    ls.rho_bl.assign(ctx.K, 0.0);
    if (ls.feasible()) solve_backhaul(ctx, ls, opts);
    return ls;
}

BackhaulRates backhaulRatesExact(const BackhaulProblem& pb) {
    BackhaulRates out;
    const std::size_t T = pb.ps.size();
    std::vector<std::vector<double>> inv(pb.p_rx.size());
    for (std::size_t j = 0; j < pb.p_rx.size(); ++j) inv[j].assign(pb.p_rx[j].size(), 0.0);

    std::vector<std::size_t> choice(T, 0);
    while (true) {
        double v = 1.0;
        for (std::size_t h = 0; h < T; ++h) v *= pb.ps[h][choice[h]];
        out.v_total += v;
        if (v > 0.0) {
            for (std::size_t j = 0; j < pb.p_rx.size(); ++j) {
                if (pb.p_rx[j].empty()) continue;
                double interf = 0.0;
                for (std::size_t h = 0; h < T; ++h)
                    if (h != j) interf += pb.p_int[j][h][choice[h]];
                for (std::size_t r = 0; r < pb.p_rx[j].size(); ++r) {
                    const double sinr = pb.p_rx[j][r] / (interf + pb.noise_w);
                    inv[j][r] += v / pb.table->rate_at_linear(sinr);
                }
            }
        }
        // mixed-radix increment over scheduling combinations
        std::size_t h = 0;
        while (h < T && ++choice[h] == pb.ps[h].size()) choice[h++] = 0;
        if (h == T) break;
    }
    out.r.resize(pb.p_rx.size());
    for (std::size_t j = 0; j < pb.p_rx.size(); ++j) {
        out.r[j].resize(pb.p_rx[j].size());
        for (std::size_t r = 0; r < pb.p_rx[j].size(); ++r)
            out.r[j][r] = out.v_total / inv[j][r];  // normalize in case v_total != 1
    }
    return out;
}

BackhaulRates backhaulRatesMc(const BackhaulProblem& pb, int samples, std::uint64_t seed) {
    BackhaulRates out;
    out.used_mc = true;
    const std::size_t T = pb.ps.size();
    std::vector<std::vector<double>> inv(pb.p_rx.size());
    for (std::size_t j = 0; j < pb.p_rx.size(); ++j) inv[j].assign(pb.p_rx[j].size(), 0.0);

    Rng rng(seed);
    std::vector<std::size_t> choice(T, 0);
    for (int s = 0; s < samples; ++s) {
        for (std::size_t h = 0; h < T; ++h) {
            double u = rng.uniform();
            std::size_t i = 0;
            while (i + 1 < pb.ps[h].size() && u >= pb.ps[h][i]) u -= pb.ps[h][i], ++i;
            choice[h] = i;
        }
        for (std::size_t j = 0; j < pb.p_rx.size(); ++j) {
            if (pb.p_rx[j].empty()) continue;
            double interf = 0.0;
            for (std::size_t h = 0; h < T; ++h)
                if (h != j) interf += pb.p_int[j][h][choice[h]];
            for (std::size_t r = 0; r < pb.p_rx[j].size(); ++r) {
                const double sinr = pb.p_rx[j][r] / (interf + pb.noise_w);
                inv[j][r] += 1.0 / pb.table->rate_at_linear(sinr);
            }
        }
    }
    out.r.resize(pb.p_rx.size());
    for (std::size_t j = 0; j < pb.p_rx.size(); ++j) {
        out.r[j].resize(pb.p_rx[j].size());
        for (std::size_t r = 0; r < pb.p_rx[j].size(); ++r)
            out.r[j][r] = static_cast<double>(samples) / inv[j][r];
    }
    return out;
}

BackhaulRates backhaul_rates(const BackhaulProblem& pb, std::uint64_t combo_cap, int mc_samples,
                             std::uint64_t mc_seed) {
    double combos = 1.0;
    for (const auto& row : pb.ps) combos *= static_cast<double>(row.size());
    if (combos <= static_cast<double>(combo_cap)) return backhaulRatesExact(pb);
    return backhaulRatesMc(pb, mc_samples, mc_seed);
}

double backhaul_load_from_rates(double omega, double beta, const std::vector<double>& phi_mass,
                                const std::vector<double>& rates) {
    double acc = 0.0;
    for (std::size_t r = 0; r < rates.size(); ++r) acc += phi_mass[r] / rates[r];
    return omega / beta * acc;
}

void solve_backhaul(const EvalContext& ctx, LoadState& ls, const FixedPointOptions& opts) {
    ls.rho_bl.assign(ctx.K, 0.0);
    ls.r_bl.assign(ctx.cells.size(), {});
    if (ctx.small_cell) return;  // wired small cells: no backhaul section

    bool any_rn = false;
    for (const auto& c : ctx.cells) any_rn = any_rn || !c.rns.empty();
    if (!any_rn) return;

    const Scenario& sc = ctx.ws->sc;
    const Workspace& ws = *ctx.ws;
    const std::size_t T = ctx.cells.size();

    BackhaulProblem pb;
    pb.noise_w = sc.noise_w;
    pb.table = &sc.capacity;
    pb.p_rx.assign(T, {});
    pb.p_int.assign(T, std::vector<std::vector<double>>(T));
    pb.ps.assign(T, {});

    // received backhaul powers: RN r of cell h at eNB of cell j
    auto rx_at = [&](int enb_active, int rn_active) {
        const ActiveStation& e = ctx.act[enb_active];
        const ActiveStation& r = ctx.act[rn_active];
        const double g = r.static_index >= 0 ? ws.bh_gain_static[r.static_index][e.static_index]
                                             : ws.bh_gain_site[r.site][e.static_index];
        return r.backhaul_w * g;
    };
    for (std::size_t j = 0; j < T; ++j) {
        const auto& cj = ctx.cells[j];
        for (int r : cj.rns) pb.p_rx[j].push_back(rx_at(cj.enb, r));
        for (std::size_t h = 0; h < T; ++h) {
            pb.p_int[j][h].assign(ctx.cells[h].rns.size() + 1, 0.0);
            for (std::size_t i = 0; i < ctx.cells[h].rns.size(); ++i)
                pb.p_int[j][h][i + 1] = rx_at(cj.enb, ctx.cells[h].rns[i]);
        }
    }

    const double beta = sc.backhaul_quota;
    std::vector<double> rho_bl(T, 0.0);
    std::vector<std::vector<double>> rho_tilde(T);
    for (std::size_t j = 0; j < T; ++j) rho_tilde[j].assign(ctx.cells[j].rns.size(), 0.0);

    for (int t = 1; t <= opts.max_iter; ++t) {
        // scheduling distribution from the previous iterate
        for (std::size_t h = 0; h < T; ++h) {
            const std::size_t n = ctx.cells[h].rns.size();
            pb.ps[h].assign(n + 1, 0.0);
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += rho_tilde[h][i];
            if (total <= 0.0) {
                pb.ps[h][0] = 1.0;
            } else if (total < 1.0) {
                pb.ps[h][0] = 1.0 - total;
                for (std::size_t i = 0; i < n; ++i) pb.ps[h][i + 1] = rho_tilde[h][i];
            } else {  // overloaded backhaul: always busy, shares by load
                pb.ps[h][0] = 0.0;
                for (std::size_t i = 0; i < n; ++i) pb.ps[h][i + 1] = rho_tilde[h][i] / total;
            }
        }

        const std::uint64_t mc_seed = hash_combine(sc.rng_seed, 0xB4C0ull + t);
        const BackhaulRates rates = backhaul_rates(pb, opts.bh_combo_cap, opts.bh_mc_samples, mc_seed);
        ls.bh_used_mc = ls.bh_used_mc || rates.used_mc;

        double diff = 0.0;
        for (std::size_t j = 0; j < T; ++j) {
            const auto& cj = ctx.cells[j];
            double load = 0.0;
            for (std::size_t i = 0; i < cj.rns.size(); ++i) {
                rho_tilde[j][i] =
                    sc.traffic_mean * ctx.assoc.phi_mass[cj.rns[i]] / (beta * rates.r[j][i]);
                load += rho_tilde[j][i];
            }
            diff = std::max(diff, std::fabs(load - rho_bl[j]));
            rho_bl[j] = load;
        }
        ls.r_bl = rates.r;
        ls.bh_iterations = t;
        if (diff < opts.tol) {
            ls.bh_converged = true;
            break;
        }
        ls.bh_converged = false;
    }

    for (std::size_t j = 0; j < T; ++j) {
        ls.rho_bl[ctx.cells[j].enb] = std::min(rho_bl[j], 1.0);
        if (rho_bl[j] >= 1.0) ls.bh_stable = false;
        for (std::size_t i = 0; i < ctx.cells[j].rns.size(); ++i)
            if (ls.r_bl[j][i] <= sc.capacity.floor_bps() * 1.0000001) ls.bh_floor = true;
    }
}

}  // namespace relaysim
