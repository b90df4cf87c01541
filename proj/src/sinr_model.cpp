#include "relaysim/sinr_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "relaysim/rng.hpp"

namespace relaysim {

namespace {

const double kLn2 = std::log(2.0);

// row n of log-binomials, cached per thread (hot path in the load solver)
const std::vector<double>& lchoose_row(int n) {
    thread_local std::map<int, std::vector<double>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> row(n + 1);
    for (int k = 0; k <= n; ++k)
        row[k] = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return cache.emplace(n, std::move(row)).first->second;
}

double lchoose(int n, int k) { return lchoose_row(n)[k]; }

double sched_weight(int W, int n, double rho) {
    const double d = W - rho * (W - n);
    return W * W * (1.0 - rho) / (d * d);
}

void check_sched_args(double u, int W, double rho) {
    if (W < 2) throw std::domain_error("sched density: MQS window W must be >= 2");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::domain_error("sched density: rho must be in [0,1)");
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("sched density: u must be in [0,1]");
}

}  // namespace

double LognormalParams::mean() const { return std::exp(mu + 0.5 * sigma * sigma); }

double LognormalParams::variance() const {
    const double s2 = sigma * sigma;
    return (std::exp(s2) - 1.0) * std::exp(2.0 * mu + s2);
}

double LognormalParams::cdf(double z) const {
    if (z <= 0.0) return 0.0;
    if (sigma == 0.0) return std::log(z) < mu ? 0.0 : 1.0;
    return normal_cdf((std::log(z) - mu) / sigma);
}

double LognormalParams::quantile(double u) const {
    if (sigma == 0.0) return std::exp(mu);
    return std::exp(mu + sigma * normal_quantile(u));
}

LognormalParams fit_lognormal(double m1, double v) {
    if (!(m1 > 0.0)) throw std::domain_error("fit_lognormal: mean must be > 0");
    if (v < 0.0) throw std::domain_error("fit_lognormal: variance must be >= 0");
    LognormalParams p;
    const double s2 = std::log1p(v / (m1 * m1));
    p.sigma = std::sqrt(s2);
    p.mu = std::log(m1) - 0.5 * s2;
    return p;
}

InterferenceMoments accumulate_moments(const std::vector<double>& y, const std::vector<double>& h,
                                       const std::vector<double>& loads, int self) {
    InterferenceMoments im;
    im.y = y;
    im.h = h;
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (static_cast<int>(j) == self) continue;
        const double rho = loads[j];
        im.m1 += rho * y[j];
        im.m2 += 2.0 * rho * h[j] - rho * rho * y[j] * y[j];
    }
    im.m2 = std::max(im.m2, 0.0);
    return im;
}

LognormalParams sinr_params(double signal_mean_w, const InterferenceMoments& im, double noise_w) {
    if (!(signal_mean_w > 0.0)) throw std::domain_error("sinr_params: signal mean must be > 0");
    // signal: exponential(mean = signal_mean) fitted by moment matching
    const double mu_s = std::log(signal_mean_w) - 0.5 * kLn2;
    const double var_s2 = kLn2;
    // denominator: interference + noise; the noise shifts the mean only
    double mu_d, var_d2;
    if (im.m2 > 0.0) {
        const LognormalParams d = fit_lognormal(im.m1 + noise_w, im.m2);
        mu_d = d.mu;
        var_d2 = d.sigma * d.sigma;
    } else {
        mu_d = std::log(im.m1 + noise_w);
        var_d2 = 0.0;
    }
    LognormalParams out;
    out.mu = mu_s - mu_d;
    out.sigma = std::sqrt(var_s2 + var_d2);
    return out;
}

double sched_density_factor(double u, int W, double rho) {
    check_sched_args(u, W, rho);
    if (rho == 0.0) return 1.0;  // binomial sum telescopes, T == 1
    if (u == 0.0) return sched_weight(W, W, rho);
    if (u == 1.0) return sched_weight(W, 1, rho);
    const double lu = std::log(u), l1u = std::log1p(-u);
    double acc = 0.0;
    for (int n = 1; n <= W; ++n) {
        const double lt = lchoose(W - 1, n - 1) + (W - n) * lu + (n - 1) * l1u;
        acc += std::exp(lt) * sched_weight(W, n, rho);
    }
    return acc;
}

std::vector<double> sched_binomial_tails(double u, int W) {
    std::vector<double> tails(W);
    if (u <= 0.0) return tails;  // all zero
    if (u >= 1.0) {
        std::fill(tails.begin(), tails.end(), 1.0);
        return tails;
    }
    // accumulate the binomial pmf from j = W downward so each rank's tail
    // extends the previous one
    const double lu = std::log(u), l1u = std::log1p(-u);
    const std::vector<double>& lc = lchoose_row(W);
    double tail = 0.0;
    for (int n = 1; n <= W; ++n) {
        const int j = W - n + 1;
        tail += std::exp(lc[j] + j * lu + (W - j) * l1u);
        tails[n - 1] = std::min(tail, 1.0);
    }
    return tails;
}

double sched_rank_mix(const std::vector<double>& g, double rho) {
    const int W = static_cast<int>(g.size());
    check_sched_args(0.0, W, rho);
    double acc = 0.0;
    for (int n = 1; n <= W; ++n) acc += sched_weight(W, n, rho) * g[n - 1];
    return acc / W;
}

double sched_mass(double u, int W, double rho) {
    check_sched_args(u, W, rho);
    if (u == 0.0) return 0.0;
    if (rho == 0.0) return u;
    if (u == 1.0) return sched_total_mass(W, rho);
    return sched_rank_mix(sched_binomial_tails(u, W), rho);
}

double sched_total_mass(int W, double rho) {
    check_sched_args(0.0, W, rho);
    double acc = 0.0;
    for (int n = 1; n <= W; ++n) acc += sched_weight(W, n, rho);
    return acc / W;
}

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre_01(int n) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<double> x(n), w(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton iteration on P_n, starting from the Chebyshev estimate
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    // map [-1,1] -> [0,1]
    for (int i = 0; i < n; ++i) {
        x[i] = 0.5 * (x[i] + 1.0);
        w[i] *= 0.5;
    }
    auto [ins, ok] = cache.emplace(n, std::make_pair(std::move(x), std::move(w)));
    (void)ok;
    return ins->second;
}

double expect_over_sched(const SchedSinrDist& dist, const std::function<double(double)>& f) {
    const auto& [x, w] = gauss_legendre_01(dist.nodes);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = x[i];
        acc += w[i] * f(dist.base.quantile(u)) * sched_density_factor(u, dist.window, dist.rho);
    }
    return acc;
}

std::vector<double> inv_capacity_rank_profile(const LognormalParams& base, int W,
                                              const CapacityTable& table) {
    const auto& thr = table.thresholds_linear();
    // g[n-1] = sum over MCS segments of (1/rate) * (tail at upper - tail at lower)
    std::vector<double> g(W, 0.0);
    std::vector<double> lo(W, 0.0);
    for (std::size_t i = 0; i <= thr.size(); ++i) {
        const std::vector<double> hi = i < thr.size()
                                           ? sched_binomial_tails(base.cdf(thr[i]), W)
                                           : std::vector<double>(W, 1.0);
        const double inv_rate = 1.0 / table.level_rate(i);
        for (int n = 0; n < W; ++n) g[n] += inv_rate * (hi[n] - lo[n]);
        lo = hi;
    }
    return g;
}

double expect_inv_capacity(const SchedSinrDist& dist, const CapacityTable& table) {
    return sched_rank_mix(inv_capacity_rank_profile(dist.base, dist.window, table), dist.rho);
}

double sched_cdf_raw(const SchedSinrDist& dist, double z) {
    return sched_mass(dist.base.cdf(z), dist.window, dist.rho);
}

}  // namespace relaysim
