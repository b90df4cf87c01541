// annealer.hpp - constrained simulated annealing with a dynamic-adaptive
// exterior penalty, plus the exact-Gibbs diagnostics and exhaustive oracle
// used to validate it.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "relaysim/perf_metrics.hpp"
#include "relaysim/rng.hpp"
#include "relaysim/scenario.hpp"

namespace relaysim {

enum class PenaltyMode { ExteriorAdaptive, StaticConstant, InteriorReject };

struct PenaltyParams {
    double d_max = std::numeric_limits<double>::infinity();  // seconds
    double alpha_c = 1.0;  // alpha(m-1) = alpha_c * ln(m+1); keep >= 1
    PenaltyMode mode = PenaltyMode::ExteriorAdaptive;
    double static_penalty = 0.0;  // StaticConstant surcharge (<=0: derived from the T0 probe)
};

// Exterior penalty V(x, D_max) at temperature step m (1-based); zero on the
// feasible side of the constraint.
double penalty(double pi, double dc, const PenaltyParams& params, int m);

struct SaSchedule {
    double t0 = 0.0;   // <= 0: dichotomic search
    double h = 0.9;    // geometric temperature decay, in (0,1)
    int steps = 45;
    int proposals = 0;  // <= 0: scaled from 400 at n_RN = 2 by move-set size
    int restarts = 4;
    std::uint64_t seed = 1;
};

struct EnergyPoint {
    double pi = std::numeric_limits<double>::infinity();
    double dc = std::numeric_limits<double>::infinity();
    bool feasible = false;  // loads stable and fixed point converged
};
using Evaluator = std::function<EnergyPoint(const Configuration&)>;

// Symmetric proposal kernel: relocate one RN to a lattice neighbor, step one
// target-power component, or step the bias; invalid draws are resampled.
class MoveSet {
public:
    MoveSet(const Workspace& ws, int n_rn);

    int nominal_moves() const { return 8 * n_rn_ + 6; }
    int n_rn() const { return n_rn_; }

    // apply move index `m` to x; nullopt when the move leaves the box
    std::optional<Configuration> apply(const Configuration& x, int m) const;
    Configuration propose(const Configuration& x, Rng& rng) const;
    Configuration random_config(Rng& rng) const;

private:
    const Workspace* ws_;
    int n_rn_;
};

struct TraceRow {
    int restart = 0;
    int step = 0;  // 1-based temperature step m
    double temperature = 0.0;
    double energy = 0.0;   // F of the current solution
    double pi = 0.0;
    double dc = 0.0;
    double penalty = 0.0;
    double acceptance = 0.0;  // accepted / proposed within the step
    bool feasible = false;    // current solution in the feasible set
    double best_pi = std::numeric_limits<double>::infinity();
};

struct AnnealResult {
    Configuration best;
    double best_pi = std::numeric_limits<double>::infinity();
    double best_dc = std::numeric_limits<double>::infinity();
    bool found_feasible = false;
    double t0_used = 0.0;
    bool t0_degenerate = false;  // flat probe landscape, floor returned
    std::vector<TraceRow> trace;
    std::uint64_t evaluations = 0;
};

// Metropolis acceptance; downhill always, uphill with exp(-dF/T).
bool metropolis_accept(double f_new, double f_cur, double temperature, Rng& rng);

struct T0Result {
    double t0 = 0.0;
    bool degenerate = false;  // all probed moves were energy-flat
    double scale = 0.0;       // median |dF| of the probe walk
};

// Dichotomic search for the initial temperature: probe a 200-move random
// walk, then bisect until the predicted initial acceptance lands in
// [0.7, 0.9] (target 0.8).
T0Result find_t0(const MoveSet& moves, const Evaluator& eval, const PenaltyParams& params,
                 std::uint64_t seed, int probe_moves = 200);

// Full constrained SA: `restarts` independent chains (distinct seeds), best
// feasible configuration by Pi across all of them. found_feasible stays
// false when no visited configuration satisfied the constraint.
AnnealResult anneal(const Workspace& ws, int n_rn, const PenaltyParams& params,
                    SaSchedule schedule, const Evaluator& eval);

// Thread-safe memoization of the evaluation pipeline keyed by configuration.
class CachedEvaluator {
public:
    CachedEvaluator(const Workspace& ws, EvalOptions opts) : ws_(&ws), opts_(opts) {}

    EnergyPoint operator()(const Configuration& x) const;
    std::uint64_t lookups() const { return lookups_; }
    std::uint64_t misses() const { return misses_; }

private:
    const Workspace* ws_;
    EvalOptions opts_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::uint64_t, EnergyPoint> cache_;
    mutable std::uint64_t lookups_ = 0, misses_ = 0;
};

struct ExhaustiveResult {
    Configuration best;
    double best_pi = std::numeric_limits<double>::infinity();
    double best_dc = std::numeric_limits<double>::infinity();
    bool found_feasible = false;
    std::uint64_t count = 0;  // configurations enumerated
};

// Brute-force feasible optimum over the whole configuration space; refuses
// spaces larger than `cap`.
ExhaustiveResult exhaustive_search(const Workspace& ws, int n_rn, double d_max,
                                   const Evaluator& eval, std::uint64_t cap = 1000000);

// Reference point with no RNs deployed: the minimum-energy stable
// configuration over the eNB target-power grid (Pi_0, D_0).
struct Baseline {
    Configuration x;
    double pi = std::numeric_limits<double>::infinity();
    double dc = std::numeric_limits<double>::infinity();
    bool found = false;
};
Baseline enb_only_baseline(const Workspace& ws, const Evaluator& eval);

// Exact Gibbs concentration diagnostics on an enumerable toy space with
// known objective/delay tables (all values O(1); objectives must be > 0 so
// the penalty's minimizers are exactly the feasible set).
struct GibbsToy {
    std::vector<double> objective;  // U(x)
    std::vector<double> delay;      // D_c(x)
    double d_max = 1.0;
};

struct GibbsStage {
    int m = 0;
    double temperature = 0.0;
    double mu_over_t = 0.0;
    double mass_on_optimum = 0.0;
};

struct GibbsReport {
    std::vector<GibbsStage> stages;
    std::vector<std::size_t> optimum;  // feasible minimizers of the objective
    bool empty_feasible = false;
    double final_mass = 0.0;
};

// Stages m = 1..stages with T = 1/m and mu/T = ln(m+1); exact normalization
// over the whole space at every stage.
GibbsReport gibbs_concentration_check(const GibbsToy& toy, int stages = 200);

}  // namespace relaysim
