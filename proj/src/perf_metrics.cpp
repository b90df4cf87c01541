#include "relaysim/perf_metrics.hpp"

#include <algorithm>
#include <cmath>

namespace relaysim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// per-pixel \int pi / C for station k, given its precomputed StationInvCap
double q_at(const EvalContext& ctx, const StationInvCap& q, int k, std::size_t pixel) {
    if (!ctx.tx.clamped[pixel]) return q.unclamped;
    const auto& list = ctx.clamped_px[k];
    const auto it = std::lower_bound(list.begin(), list.end(), static_cast<std::uint32_t>(pixel));
    return q.clamped[static_cast<std::size_t>(it - list.begin())];
}

}  // namespace

double access_delay_at(const EvalContext& ctx, const LoadState& ls, std::size_t pixel) {
    const int k = ctx.assoc.server[pixel];
    if (ls.rho[k] >= 1.0) return kInf;
    const StationInvCap q = station_inv_capacity(ctx, ls.rho, k);
    const double xi = ctx.ws->sc.flow_bits;
    return xi / (1.0 - ls.rho[k]) * q_at(ctx, q, k, pixel) / (1.0 - ctx.beta());
}

double station_delay(const EvalContext& ctx, const LoadState& ls, int k) {
    if (ctx.assoc.phi_mass[k] <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (ls.rho[k] >= 1.0) return kInf;
    const StationInvCap q = station_inv_capacity(ctx, ls.rho, k);
    const double da = ctx.ws->grid.pixel_area();
    double acc = ctx.unclamped_phimass[k] * q.unclamped;
    for (std::size_t i = 0; i < ctx.clamped_px[k].size(); ++i)
        acc += ctx.ws->phi[ctx.clamped_px[k][i]] * da * q.clamped[i];
    const double xi = ctx.ws->sc.flow_bits;
    return xi / ((1.0 - ls.rho[k]) * (1.0 - ctx.beta())) * acc / ctx.assoc.phi_mass[k];
}

double littles_law_delay(const EvalContext& ctx, const LoadState& ls, int k) {
    // the corollary substitutes the load equation into the numerator
    const double rho_sub = access_load_formula(ctx, ls.rho, k);
    const double xi = ctx.ws->sc.flow_bits;
    return xi * rho_sub / ((1.0 - ls.rho[k]) * ctx.ws->sc.traffic_mean * ctx.assoc.phi_mass[k]);
}

double backhaul_delay(const EvalContext& ctx, const LoadState& ls, int r) {
    if (ctx.act[r].kind == StationKind::Enb) return 0.0;  // D_BL,j,j = 0
    if (ctx.small_cell) return 0.0;
    const int j = ctx.act[r].donor_index;
    if (ls.rho_bl[j] >= 1.0) return kInf;
    // locate r inside its cell's rate row
    for (std::size_t c = 0; c < ctx.cells.size(); ++c) {
        if (ctx.cells[c].enb != j) continue;
        for (std::size_t i = 0; i < ctx.cells[c].rns.size(); ++i) {
            if (ctx.cells[c].rns[i] != r) continue;
            const double rate = ls.r_bl[c][i];
            return ctx.ws->sc.flow_bits /
                   ((1.0 - ls.rho_bl[j]) * ctx.ws->sc.backhaul_quota * rate);
        }
    }
    return kInf;
}

EvalReport evaluate(const Workspace& ws, const Configuration& x, const EvalOptions& opts) {
    EvalReport rep;
    rep.x = x;
    rep.weighting_name = opts.weighting == DelayWeighting::Paper ? "paper" : "traffic_share";

    EvalContext ctx = make_context(ws, x, opts.small_cell);
    rep.loads = fixed_point(ctx, opts.fpt);
    rep.d_station.assign(ctx.K, std::numeric_limits<double>::quiet_NaN());
    rep.d_backhaul.assign(ctx.K, 0.0);
    if (!rep.loads.feasible()) return rep;  // pi / d_c stay at +inf

    const Scenario& sc = ws.sc;
    const double da = ws.grid.pixel_area();
    const double xi = sc.flow_bits;
    const double beta = ctx.beta();
    const int cell_c = ctx.act[ws.enb_c].cell;

    // one inverse-capacity pass per station at the converged loads
    std::vector<StationInvCap> q(ctx.K);
    for (int k = 0; k < ctx.K; ++k)
        if (ctx.assoc.phi_mass[k] > 0.0) q[k] = station_inv_capacity(ctx, rep.loads.rho, k);

    for (int k = 0; k < ctx.K; ++k) {
        if (ctx.assoc.phi_mass[k] <= 0.0) continue;
        double acc = ctx.unclamped_phimass[k] * q[k].unclamped;
        for (std::size_t i = 0; i < ctx.clamped_px[k].size(); ++i)
            acc += ws.phi[ctx.clamped_px[k][i]] * da * q[k].clamped[i];
        rep.d_station[k] =
            xi / ((1.0 - rep.loads.rho[k]) * (1.0 - beta)) * acc / ctx.assoc.phi_mass[k];
        rep.d_backhaul[k] = backhaul_delay(ctx, rep.loads, k);
    }

    // cell-c aggregates
    double d_paper = 0.0, d_share = 0.0, phi_c = 0.0, a_c = 0.0;
    for (int k = 0; k < ctx.K; ++k) {
        if (ctx.act[k].cell != cell_c) continue;
        a_c += ctx.assoc.area[k];
        if (ctx.assoc.phi_mass[k] <= 0.0) continue;
        phi_c += ctx.assoc.phi_mass[k];
        const double dk = rep.d_station[k] + rep.d_backhaul[k];
        d_paper += ctx.assoc.phi_mass[k] / ctx.assoc.area[k] * dk;
        d_share += ctx.assoc.phi_mass[k] * dk;  // normalized below
    }
    if (phi_c > 0.0) d_share /= phi_c;
    rep.a_c = a_c;
    rep.phi_c = phi_c;
    rep.d_paper = d_paper;
    rep.d_share = d_share;
    rep.d_c = opts.weighting == DelayWeighting::Paper ? d_paper : d_share;

    // energy per bit over cell c
    if (opts.dump_pixels) {
        rep.eps_pixel.assign(ws.grid.size(), 0.0);
        rep.q_pixel.assign(ws.grid.size(), 0.0);
    }
    double energy = 0.0;
    for (std::size_t p = 0; p < ws.grid.size(); ++p) {
        const int k = ctx.assoc.server[p];
        if (ctx.act[k].cell != cell_c || ctx.assoc.phi_mass[k] <= 0.0) continue;
        const double qp = q_at(ctx, q[k], k, p);
        const double eps = ctx.tx.power_w[p] * qp;
        energy += ws.phi[p] * eps * da;
        if (opts.dump_pixels) {
            rep.eps_pixel[p] = eps;
            rep.q_pixel[p] = qp;
        }
    }
    rep.pi = energy / a_c;
    rep.feasible = true;
    return rep;
}

}  // namespace relaysim
