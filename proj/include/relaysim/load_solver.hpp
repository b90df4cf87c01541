// load_solver.hpp - coupled access-load fixed point and backhaul rates/loads.

#pragma once

#include <cstdint>
#include <vector>

#include "relaysim/scenario.hpp"
#include "relaysim/sinr_model.hpp"

namespace relaysim {

struct FixedPointOptions {
    double tol = 0.01;       // max-abs stopping rule on the load vector
    int max_iter = 50;
    std::uint64_t bh_combo_cap = 1000000;  // exact enumeration limit
    int bh_mc_samples = 100000;            // Monte-Carlo fallback draws
};

struct LoadState {
    std::vector<double> rho;     // access load per active station, clamped to [0,1]
    std::vector<double> rho_bl;  // backhaul load per active station (eNB entries)
    // backhaul rate R_BL[j][r]: bits/s from active RN r to its donor eNB j;
    // indexed like cells() below
    std::vector<std::vector<double>> r_bl;

    std::vector<std::vector<double>> history;  // raw iterates, rho(0) = 0 first

    int iterations = 0;
    bool converged = false;
    bool stable = true;       // false once some rho_k >= 1
    int bh_iterations = 0;
    bool bh_converged = true;
    bool bh_stable = true;    // false once some rho_BL >= 1
    bool bh_used_mc = false;
    bool bh_floor = false;    // some backhaul link pinned at the rate floor

    bool feasible() const {
        return converged && stable && bh_converged && bh_stable;
    }
};

// Everything an evaluation needs, precomputed once per configuration.
struct EvalContext {
    const Workspace* ws = nullptr;
    Configuration x;
    std::vector<ActiveStation> act;
    AssociationMap assoc;
    TxPowerField tx;
    int K = 0;

    double p_enb_w = 0.0;  // FCPC targets, linear
    double p_rn_w = 0.0;

    // interference integrals: Y[k*K+j], H[k*K+j] for target k, source j
    std::vector<double> Y;
    std::vector<double> H;

    // pixel partition per station: clamped pixels listed individually, the
    // unclamped rest shares one received power (the FCPC target)
    std::vector<std::vector<std::uint32_t>> clamped_px;
    std::vector<double> unclamped_phimass;  // sum of phi * dA over unclamped pixels

    struct Cell {
        int enb = -1;              // active index
        std::vector<int> rns;      // active indices of its RNs
    };
    std::vector<Cell> cells;       // one entry per eNB

    bool small_cell = false;
    double beta() const { return small_cell ? 0.0 : ws->sc.backhaul_quota; }

    double signal_mean(int k, std::size_t pixel) const;  // received power of a UE in s
};

EvalContext make_context(const Workspace& ws, const Configuration& x, bool small_cell = false);

// App.-A interference moments for station k under the given load vector
// (entry k itself is ignored).
InterferenceMoments interference_moments(const EvalContext& ctx, const std::vector<double>& loads,
                                         int k);

// Per-station E[1/C] under the scheduled-SINR density: one value for the
// unclamped area plus one per clamped pixel. Loads feed both the MQS tilt
// (own entry) and the interference moments (others).
struct StationInvCap {
    double unclamped = 0.0;
    std::vector<double> clamped;  // parallel to ctx.clamped_px[k]
};
StationInvCap station_inv_capacity(const EvalContext& ctx, const std::vector<double>& loads, int k);

// Theorem-2 right-hand side evaluated at the given load state (entry k
// supplies the station's own scheduling tilt).
double access_load_formula(const EvalContext& ctx, const std::vector<double>& loads, int k);

// The load operator F_k: a function of the interfering loads only, with the
// station's own scheduling tilt solved self-consistently (entry k of `loads`
// only warm-starts the inner solve).
double access_load(const EvalContext& ctx, const std::vector<double>& loads, int k);

// Plain iteration of F from rho = 0 with the paper's stopping rule.
LoadState fixed_point(const EvalContext& ctx, const FixedPointOptions& opts = {});

// Backhaul scheduling distribution and rate solver; standalone so tests can
// drive synthetic problems.
struct BackhaulProblem {
    double noise_w = 0.0;
    const CapacityTable* table = nullptr;
    // p_rx[j][r]: power received by eNB j from its r-th RN
    std::vector<std::vector<double>> p_rx;
    // p_int[j][h][i]: interference at eNB j when cell h schedules option i
    // (option 0 = idle = 0 power)
    std::vector<std::vector<std::vector<double>>> p_int;
    // ps[h][i]: probability cell h schedules option i; each row sums to 1
    std::vector<std::vector<double>> ps;
};

struct BackhaulRates {
    std::vector<std::vector<double>> r;  // [cell][rn] harmonic-mean rate
    bool used_mc = false;
    double v_total = 0.0;  // sum of combination probabilities (exact path)
};

BackhaulRates backhaul_rates(const BackhaulProblem& pb, std::uint64_t combo_cap, int mc_samples,
                             std::uint64_t mc_seed);

// rho_BL = omega/beta * sum_r Phi_r / R_r
double backhaul_load_from_rates(double omega, double beta, const std::vector<double>& phi_mass,
                                const std::vector<double>& rates);

// Inner fixed point on the backhaul loads; fills r_bl / rho_bl in `ls`.
void solve_backhaul(const EvalContext& ctx, LoadState& ls, const FixedPointOptions& opts = {});

}  // namespace relaysim
