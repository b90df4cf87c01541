// sinr_model.hpp - analytic SINR machinery: lognormal moment matching for
// interference, the scheduled-SINR density under maximum quantile scheduling,
// and expectations of capacity functionals against it.

#pragma once

#include <functional>
#include <vector>

#include "relaysim/capacity.hpp"

namespace relaysim {

struct LognormalParams {
    double mu = 0.0;     // log-scale location (nepers)
    double sigma = 0.0;  // log-scale spread (nepers), >= 0

    double mean() const;
    double variance() const;
    double cdf(double z) const;       // handles the sigma == 0 point mass
    double quantile(double u) const;  // u in (0,1)
};

// Moment matching: lognormal reproducing a given mean/variance exactly.
// Throws std::domain_error for m1 <= 0 or v < 0.
LognormalParams fit_lognormal(double m1, double v);

// First two moments of the aggregate interference plus the per-interferer
// integrals they were built from.
struct InterferenceMoments {
    double m1 = 0.0;  // mean, W
    double m2 = 0.0;  // variance, W^2
    std::vector<double> y;  // Y_jk per interferer
    std::vector<double> h;  // H_jk per interferer
};

// Combine per-interferer integrals with the current loads:
//   M1 = sum_j rho_j Y_j,   M2 = sum_j (2 rho_j H_j - rho_j^2 Y_j^2),
// skipping entry `self` (the served station itself).
InterferenceMoments accumulate_moments(const std::vector<double>& y, const std::vector<double>& h,
                                       const std::vector<double>& loads, int self);

// Lognormal fit of the SINR of an unscheduled user: unit-mean exponential
// signal fading on top of a constant mean received power, divided by a
// lognormal fit of interference-plus-noise.
LognormalParams sinr_params(double signal_mean_w, const InterferenceMoments& im, double noise_w);

// Scheduling gain of the MQS density on the CDF axis:
//   factor(u) = sum_n binom(W-1,n-1) u^(W-n) (1-u)^(n-1) * T(W,n),
//   T(W,n)    = W^2 (1-rho) / (W - rho (W-n))^2.
// Requires W >= 2, 0 <= rho < 1, u in [0,1].
double sched_density_factor(double u, int W, double rho);

// Binomial tail vector at u: tails[n-1] = P(Bin(W,u) >= W-n+1). These are
// the rank-n masses of the scheduling tilt, independent of rho.
std::vector<double> sched_binomial_tails(double u, int W);

// (1/W) sum_n T(W,n) g[n-1]: expectation of a per-rank aggregate g under the
// occupancy weights. sched_mass(u) == sched_rank_mix(tails(u), rho).
double sched_rank_mix(const std::vector<double>& g, double rho);

// M(u) = integral of factor over [0,u]; closed form via binomial tails.
double sched_mass(double u, int W, double rho);

// M(1) = (1/W) sum_n T(W,n); the density's total mass (< 1 for finite W).
double sched_total_mass(int W, double rho);

// Scheduled-SINR distribution of one user population: lognormal base plus
// the (W, rho)-dependent scheduling tilt.
struct SchedSinrDist {
    LognormalParams base;
    int window = 10;   // W
    double rho = 0.0;  // serving-station load
    int nodes = 256;   // quadrature nodes for the generic expectation
};

// Generic expectation \int f(z) pi(z) dz via fixed-node Gauss-Legendre
// quadrature on the CDF axis.
double expect_over_sched(const SchedSinrDist& dist, const std::function<double(double)>& f);

// Per-rank aggregate of 1/C for a lognormal base: g[n-1] collects the MCS
// step structure so that E[1/C] = sched_rank_mix(g, rho) for any load.
std::vector<double> inv_capacity_rank_profile(const LognormalParams& base, int W,
                                              const CapacityTable& table);

// E[1/C] against the scheduled density, exact over the MCS step structure:
// the integral is summed segment-by-segment using closed-form masses.
double expect_inv_capacity(const SchedSinrDist& dist, const CapacityTable& table);

// Raw (unnormalized) scheduled CDF, M(base.cdf(z)); divide by
// sched_total_mass for the conditional distribution.
double sched_cdf_raw(const SchedSinrDist& dist, double z);

// Gauss-Legendre nodes/weights on [0,1]; cached per order.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre_01(int n);

}  // namespace relaysim
