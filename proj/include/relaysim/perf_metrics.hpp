// perf_metrics.hpp - flow-level delay and energy-per-bit metrics on top of
// the solved load state.

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "relaysim/load_solver.hpp"

namespace relaysim {

enum class DelayWeighting { Paper, TrafficShare };

struct EvalOptions {
    DelayWeighting weighting = DelayWeighting::Paper;
    bool small_cell = false;   // beta -> 0, no backhaul section or delay
    bool dump_pixels = false;  // fill per-pixel epsilon / inverse-rate fields
    FixedPointOptions fpt;
};

struct EvalReport {
    double pi = std::numeric_limits<double>::infinity();   // J/bit
    double d_c = std::numeric_limits<double>::infinity();  // mean flow delay, s
    double d_paper = std::numeric_limits<double>::infinity();
    double d_share = std::numeric_limits<double>::infinity();

    std::vector<double> d_station;   // D_k per active station (NaN when Phi_k = 0)
    std::vector<double> d_backhaul;  // D_BL for the station's backhaul hop, 0 for eNBs
    LoadState loads;
    bool feasible = false;

    double a_c = 0.0;    // area of cell c under this configuration
    double phi_c = 0.0;  // traffic mass of cell c

    // optional per-pixel dumps (zero outside cell c)
    std::vector<double> eps_pixel;  // energy per bit, J/bit
    std::vector<double> q_pixel;    // \int pi / C dz, s/bit

    std::string weighting_name = "paper";
    Configuration x;
};

// Per-pixel average access delay D_k(s) for the station serving `pixel`.
double access_delay_at(const EvalContext& ctx, const LoadState& ls, std::size_t pixel);

// Traffic-weighted station delay D_k; requires Phi_k > 0.
double station_delay(const EvalContext& ctx, const LoadState& ls, int k);

// Little's-law route to the same quantity: xi * F_k(rho) / ((1-rho_k) omega Phi_k).
double littles_law_delay(const EvalContext& ctx, const LoadState& ls, int k);

// Backhaul hop delay for active RN r (0 when r is an eNB).
double backhaul_delay(const EvalContext& ctx, const LoadState& ls, int r);

// Full evaluation pipeline: association, fixed point, backhaul, delays, energy.
EvalReport evaluate(const Workspace& ws, const Configuration& x, const EvalOptions& opts = {});

}  // namespace relaysim
