// oracle_mc.hpp - seeded Monte-Carlo snapshot simulator used as an
// independent oracle for the analytic model. It deliberately re-implements
// SINR sampling, MQS scheduling and the load estimate from the system-model
// primitives (gains, powers, loads) without touching the analytic machinery.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "relaysim/load_solver.hpp"
#include "relaysim/scenario.hpp"
#include "relaysim/sinr_model.hpp"

namespace relaysim {

// How scheduled interferer locations are drawn: the traffic shape phi/Phi_j
// mirrors the App.-A approximation (default); LoadShape draws from the
// actual local load contribution to quantify that approximation instead.
enum class McInterfererMode { TrafficShape, LoadShape };

struct McLoadEstimate {
    double load = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

// Instantaneous-SINR samples for a user at `pixel` served by station k:
// Bernoulli(rho_j) interferer activity, interferer location from the
// per-station spatial law, unit-mean exponential fading per link.
std::vector<double> sample_sinr(const EvalContext& ctx, const std::vector<double>& loads,
                                std::size_t pixel, int k, int samples, std::uint64_t seed,
                                McInterfererMode mode = McInterfererMode::TrafficShape);

// Brute-force MQS mechanism on i.i.d. lognormal SINR draws: geometric
// occupancy, per-user W-deep ranking windows, lowest ranking wins, ties
// redrawn. Returns the scheduled user's current-block SINR samples.
std::vector<double> simulate_mqs(const LognormalParams& pdf, int window, double rho, int samples,
                                 std::uint64_t seed);

// Empirical access load of station k: scheduled-SINR draws per pixel
// (win-conditioned through the ranking mechanism) averaged into
// omega phi / ((1-beta) C).
McLoadEstimate empirical_load(const EvalContext& ctx, const std::vector<double>& loads, int k,
                              int samples, std::uint64_t seed,
                              McInterfererMode mode = McInterfererMode::TrafficShape);

// Kolmogorov distance between an empirical sample and a reference CDF.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace relaysim
