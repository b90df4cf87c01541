#include "relaysim/oracle_mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relaysim {

namespace {

// oracle-local capacity lookup (linear scan; the production table uses a
// binary search, this path stays independent)
double oracle_rate(const CapacityTable& table, double sinr_linear) {
    const auto& thr = table.thresholds_linear();
    double rate = table.floor_bps();
    for (std::size_t i = 0; i < thr.size(); ++i) {
        if (sinr_linear < thr[i]) break;
        rate = table.level_rate(i + 1);
    }
    return rate;
}

// discrete spatial sampler over one station's serving area
struct AreaSampler {
    std::vector<std::uint32_t> pixels;
    std::vector<double> cum;  // cumulative weights, last == total

    std::size_t draw(Rng& rng) const {
        const double u = rng.uniform() * cum.back();
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        const std::size_t i = std::min(static_cast<std::size_t>(it - cum.begin()),
                                       pixels.size() - 1);
        return pixels[i];
    }
};

AreaSampler make_sampler(const EvalContext& ctx, int j, McInterfererMode mode,
                         const std::vector<double>& pixel_load) {
    AreaSampler s;
    double total = 0.0;
    for (std::size_t p = 0; p < ctx.ws->grid.size(); ++p) {
        if (ctx.assoc.server[p] != j) continue;
        const double w = mode == McInterfererMode::TrafficShape ? ctx.ws->phi[p] : pixel_load[p];
        if (w <= 0.0) continue;
        s.pixels.push_back(static_cast<std::uint32_t>(p));
        total += w;
        s.cum.push_back(total);
    }
    return s;
}

// one instantaneous SINR draw for a user at `pixel` towards station k
double draw_sinr(const EvalContext& ctx, const std::vector<double>& loads,
                 const std::vector<AreaSampler>& samplers, std::size_t pixel, int k, Rng& rng) {
    const Workspace& ws = *ctx.ws;
    const double signal =
        ctx.tx.power_w[pixel] * ws.gain_of(k, ctx.act, pixel) * rng.exponential();
    double interference = 0.0;
    for (int j = 0; j < ctx.K; ++j) {
        if (j == k || samplers[j].pixels.empty()) continue;
        if (rng.uniform() >= loads[j]) continue;  // station j idle on this block
        const std::size_t fp = samplers[j].draw(rng);
        interference += ctx.tx.power_w[fp] * ws.gain_of(k, ctx.act, fp) * rng.exponential();
    }
    return signal / (interference + ws.sc.noise_w);
}

}  // namespace

std::vector<double> sample_sinr(const EvalContext& ctx, const std::vector<double>& loads,
                                std::size_t pixel, int k, int samples, std::uint64_t seed,
                                McInterfererMode mode) {
    std::vector<double> pixel_load;
    if (mode == McInterfererMode::LoadShape) {
        // local load contribution: traffic over the local mean scheduled rate,
        // estimated from interference-free draws (shape only, scale cancels)
        pixel_load.assign(ctx.ws->grid.size(), 0.0);
        Rng shape_rng(hash_combine(seed, 0x5A9Eull));
        for (std::size_t p = 0; p < ctx.ws->grid.size(); ++p) {
            const int j = ctx.assoc.server[p];
            double inv = 0.0;
            for (int i = 0; i < 64; ++i) {
                const double g = ctx.tx.power_w[p] * ctx.ws->gain_of(j, ctx.act, p) *
                                 shape_rng.exponential() / ctx.ws->sc.noise_w;
                inv += 1.0 / oracle_rate(ctx.ws->sc.capacity, g);
            }
            pixel_load[p] = ctx.ws->phi[p] * inv;
        }
    }
    std::vector<AreaSampler> samplers(ctx.K);
    for (int j = 0; j < ctx.K; ++j) samplers[j] = make_sampler(ctx, j, mode, pixel_load);

    Rng rng(seed);
    std::vector<double> out(samples);
    for (int i = 0; i < samples; ++i) out[i] = draw_sinr(ctx, loads, samplers, pixel, k, rng);
    return out;
}

std::vector<double> simulate_mqs(const LognormalParams& pdf, int window, double rho, int samples,
                                 std::uint64_t seed) {
    if (window < 2) throw std::domain_error("simulate_mqs: window must be >= 2");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::domain_error("simulate_mqs: rho must be in [0,1)");
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(samples);
    std::vector<double> win(window);
    while (static_cast<int>(out.size()) < samples) {
        const int users = rng.geometric_ge1(rho);
        int best_rank = window + 1;
        int winners = 0;
        double winner_sinr = 0.0;
        for (int u = 0; u < users; ++u) {
            for (int w = 0; w < window; ++w)
                win[w] = pdf.sigma == 0.0 ? std::exp(pdf.mu)
                                          : std::exp(pdf.mu + pdf.sigma * rng.normal());
            const double cur = win[window - 1];
            int rank = 1;
            for (int w = 0; w < window - 1; ++w)
                if (win[w] > cur) ++rank;
            if (rank < best_rank) {
                best_rank = rank;
                winners = 1;
                winner_sinr = cur;
            } else if (rank == best_rank) {
                ++winners;
            }
        }
        if (winners != 1) continue;  // ranking tie: redraw the whole block
        out.push_back(winner_sinr);
    }
    return out;
}

McLoadEstimate empirical_load(const EvalContext& ctx, const std::vector<double>& loads, int k,
                              int samples, std::uint64_t seed, McInterfererMode mode) {
    const Workspace& ws = *ctx.ws;
    McLoadEstimate est;
    if (ctx.assoc.phi_mass[k] <= 0.0) return est;

    std::vector<AreaSampler> samplers(ctx.K);
    for (int j = 0; j < ctx.K; ++j) samplers[j] = make_sampler(ctx, j, mode, {});

    const double da = ws.grid.pixel_area();
    const int window = ws.sc.mqs_window;
    const double rho_k = loads[k];
    Rng rng(seed);
    std::vector<double> win(window);

    double load = 0.0, var = 0.0;
    for (std::size_t p = 0; p < ws.grid.size(); ++p) {
        if (ctx.assoc.server[p] != k) continue;
        const double weight = ws.sc.traffic_mean * ws.phi[p] * da / (1.0 - ctx.beta());
        const int n = std::max(
            8, static_cast<int>(std::lround(samples * ws.phi[p] * da / ctx.assoc.phi_mass[k])));
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < n; ++i) {
            // redraw until the user at p wins its block (scheduled-SINR draw)
            double inv = 0.0;
            while (true) {
                for (int w = 0; w < window; ++w)
                    win[w] = draw_sinr(ctx, loads, samplers, p, k, rng);
                const double cur = win[window - 1];
                int rank = 1;
                for (int w = 0; w < window - 1; ++w)
                    if (win[w] > cur) ++rank;
                const int users = rng.geometric_ge1(rho_k);
                int best_other = window + 1;
                for (int u = 1; u < users; ++u)
                    best_other = std::min(best_other, rng.uniform_int(1, window));
                if (rank >= best_other) continue;  // lost the block, or ranking tie
                inv = 1.0 / oracle_rate(ws.sc.capacity, cur);
                break;
            }
            acc += inv;
            acc2 += inv * inv;
        }
        const double mean = acc / n;
        const double v = std::max(0.0, acc2 / n - mean * mean) / n;
        load += weight * mean;
        var += weight * weight * v;
        est.samples += static_cast<std::uint64_t>(n);
    }
    est.load = load;
    est.std_error = std::sqrt(var);
    return est;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::fabs((i + 1) / n - f));
        d = std::max(d, std::fabs(i / n - f));
    }
    return d;
}

}  // namespace relaysim
