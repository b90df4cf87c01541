#include "relaysim/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

namespace relaysim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// F(x) at temperature step m for the given penalty mode; unstable
// configurations carry infinite energy in every mode.
double sa_energy(const EnergyPoint& e, const PenaltyParams& params, int m) {
    if (!e.feasible || !std::isfinite(e.pi)) return kInf;
    switch (params.mode) {
        case PenaltyMode::ExteriorAdaptive:
            return e.pi + penalty(e.pi, e.dc, params, m);
        case PenaltyMode::StaticConstant:
            return e.pi + (e.dc > params.d_max ? params.static_penalty : 0.0);
        case PenaltyMode::InteriorReject:
            return e.dc > params.d_max ? kInf : e.pi;
    }
    return kInf;
}

}  // namespace

double penalty(double pi, double dc, const PenaltyParams& params, int m) {
    if (params.mode != PenaltyMode::ExteriorAdaptive) return 0.0;
    if (!(dc > params.d_max)) return 0.0;  // the boundary itself is feasible
    const double alpha = params.alpha_c * std::log(static_cast<double>(m) + 1.0);
    return alpha * pi / params.d_max * (dc - params.d_max);
}

bool metropolis_accept(double f_new, double f_cur, double temperature, Rng& rng) {
    if (temperature <= 0.0) throw std::domain_error("metropolis_accept: temperature must be > 0");
    if (std::isinf(f_cur) && std::isinf(f_new)) return true;  // drift on the flat infinite shelf
    const double df = f_new - f_cur;
    if (df <= 0.0) return true;
    return rng.uniform() < std::exp(-df / temperature);
}

MoveSet::MoveSet(const Workspace& ws, int n_rn) : ws_(&ws), n_rn_(n_rn) {
    if (n_rn < 0) throw std::invalid_argument("MoveSet: n_rn must be >= 0");
    if (n_rn > static_cast<int>(ws.sites.size()))
        throw std::invalid_argument("MoveSet: more RNs than candidate sites");
}

std::optional<Configuration> MoveSet::apply(const Configuration& x, int m) const {
    Configuration y = x;
    if (m < 8 * n_rn_) {  // relocate RN (m / 8) towards neighbor direction (m % 8)
        const int rn = m / 8;
        const int target = ws_->site_neighbors[x.rn_sites[rn]][m % 8];
        if (target < 0) return std::nullopt;
        for (int s : x.rn_sites)
            if (s == target) return std::nullopt;  // site already occupied
        y.rn_sites[rn] = target;
        return y;
    }
    const int t = m - 8 * n_rn_;
    int* field = nullptr;
    int limit = 0;
    if (t < 2) { field = &y.p_enb_idx; limit = ws_->sc.target_dbm.count(); }
    else if (t < 4) { field = &y.p_rn_idx; limit = ws_->sc.target_dbm.count(); }
    else { field = &y.bias_idx; limit = ws_->sc.bias_db.count(); }
    *field += (t % 2 == 0) ? 1 : -1;
    if (*field < 0 || *field >= limit) return std::nullopt;
    return y;
}

Configuration MoveSet::propose(const Configuration& x, Rng& rng) const {
    // uniform over the nominal move set; draws that leave the box (or land on
    // an occupied site) are resampled
    for (int attempt = 0; attempt < 4096; ++attempt) {
        const int m = rng.uniform_int(0, nominal_moves() - 1);
        if (auto y = apply(x, m)) return *y;
    }
    return x;  // fully blocked corner; stay put
}

Configuration MoveSet::random_config(Rng& rng) const {
    Configuration x;
    const int S = static_cast<int>(ws_->sites.size());
    while (static_cast<int>(x.rn_sites.size()) < n_rn_) {
        const int s = rng.uniform_int(0, S - 1);
        if (std::find(x.rn_sites.begin(), x.rn_sites.end(), s) == x.rn_sites.end())
            x.rn_sites.push_back(s);
    }
    x.p_enb_idx = rng.uniform_int(0, ws_->sc.target_dbm.count() - 1);
    x.p_rn_idx = rng.uniform_int(0, ws_->sc.target_dbm.count() - 1);
    x.bias_idx = rng.uniform_int(0, ws_->sc.bias_db.count() - 1);
    return x;
}

T0Result find_t0(const MoveSet& moves, const Evaluator& eval, const PenaltyParams& params,
                 std::uint64_t seed, int probe_moves) {
    Rng rng(hash_combine(seed, 0x70B0ull));
    Configuration x = moves.random_config(rng);
    EnergyPoint ex = eval(x);
    double fx = sa_energy(ex, params, 1);

    std::vector<double> deltas;
    deltas.reserve(probe_moves);
    for (int i = 0; i < probe_moves * 5 && static_cast<int>(deltas.size()) < probe_moves; ++i) {
        const Configuration y = moves.propose(x, rng);
        const double fy = sa_energy(eval(y), params, 1);
        if (std::isfinite(fx) && std::isfinite(fy)) deltas.push_back(fy - fx);
        x = y;  // free walk through the space
        fx = fy;
    }

    T0Result out;
    std::vector<double> mags;
    for (double d : deltas) mags.push_back(std::fabs(d));
    std::sort(mags.begin(), mags.end());
    out.scale = mags.empty() ? 0.0 : mags[mags.size() / 2];
    if (out.scale <= 0.0) {
        // flat landscape: any temperature accepts everything
        out.degenerate = true;
        out.t0 = 1e-6;
        return out;
    }

    const auto acceptance = [&](double t) {
        double acc = 0.0;
        for (double d : deltas) acc += d <= 0.0 ? 1.0 : std::exp(-d / t);
        return acc / static_cast<double>(deltas.size());
    };

    double lo = 1e-6 * out.scale, hi = 1e6 * out.scale;
    double t = std::sqrt(lo * hi);
    for (int iter = 0; iter < 200; ++iter) {
        t = std::sqrt(lo * hi);
        const double a = acceptance(t);
        if (a >= 0.7 && a <= 0.9) break;
        (a < 0.8 ? lo : hi) = t;
    }
    out.t0 = t;
    return out;
}

EnergyPoint CachedEvaluator::operator()(const Configuration& x) const {
    const std::uint64_t key = config_key(x);
    {
        std::lock_guard<std::mutex> lock(mu_);
        ++lookups_;
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    EvalReport rep = evaluate(*ws_, x, opts_);
    EnergyPoint e{rep.pi, rep.d_c, rep.feasible};
    {
        std::lock_guard<std::mutex> lock(mu_);
        ++misses_;
        cache_.emplace(key, e);
    }
    return e;
}

namespace {

struct RestartOutcome {
    Configuration best;
    double best_pi = kInf;
    double best_dc = kInf;
    bool found = false;
    std::vector<TraceRow> trace;
    std::uint64_t evaluations = 0;
};

RestartOutcome run_chain(const MoveSet& moves, const PenaltyParams& params,
                         const SaSchedule& sch, const Evaluator& eval, int restart, double t0,
                         int proposals) {
    RestartOutcome out;
    Rng rng(hash_combine(sch.seed, 0xC4A1ull + static_cast<std::uint64_t>(restart)));

    Configuration x = moves.random_config(rng);
    EnergyPoint ex = eval(x);
    ++out.evaluations;
    if (params.mode == PenaltyMode::InteriorReject) {
        // interior search starts inside the feasible region
        for (int tries = 0; tries < 2000 && !(ex.feasible && ex.dc <= params.d_max); ++tries) {
            x = moves.random_config(rng);
            ex = eval(x);
            ++out.evaluations;
        }
        if (!(ex.feasible && ex.dc <= params.d_max)) return out;  // nothing feasible seen
    }

    auto note_best = [&](const Configuration& c, const EnergyPoint& e) {
        if (e.feasible && e.dc <= params.d_max && e.pi < out.best_pi) {
            out.best = c;
            out.best_pi = e.pi;
            out.best_dc = e.dc;
            out.found = true;
        }
    };
    note_best(x, ex);

    for (int m = 1; m <= sch.steps; ++m) {
        const double t = t0 * std::pow(sch.h, m - 1);
        double fx = sa_energy(ex, params, m);
        int accepted = 0;
        for (int i = 0; i < proposals; ++i) {
            const Configuration y = moves.propose(x, rng);
            const EnergyPoint ey = eval(y);
            ++out.evaluations;
            const double fy = sa_energy(ey, params, m);
            note_best(y, ey);
            if (metropolis_accept(fy, fx, t, rng)) {
                x = y;
                ex = ey;
                fx = fy;
                ++accepted;
            }
        }
        TraceRow row;
        row.restart = restart;
        row.step = m;
        row.temperature = t;
        row.energy = fx;
        row.pi = ex.pi;
        row.dc = ex.dc;
        row.penalty = params.mode == PenaltyMode::ExteriorAdaptive && ex.feasible
                          ? penalty(ex.pi, ex.dc, params, m)
                          : 0.0;
        row.acceptance = proposals > 0 ? static_cast<double>(accepted) / proposals : 0.0;
        row.feasible = ex.feasible && ex.dc <= params.d_max;
        row.best_pi = out.best_pi;
        out.trace.push_back(row);
    }
    return out;
}

}  // namespace

AnnealResult anneal(const Workspace& ws, int n_rn, const PenaltyParams& params_in,
                    SaSchedule schedule, const Evaluator& eval) {
    if (!(schedule.h > 0.0 && schedule.h < 1.0))
        throw std::invalid_argument("anneal: decay h must be in (0,1)");
    if (schedule.steps < 1) throw std::invalid_argument("anneal: steps must be >= 1");

    const MoveSet moves(ws, n_rn);
    const int proposals = schedule.proposals > 0
                              ? schedule.proposals
                              : static_cast<int>(std::lround(400.0 * moves.nominal_moves() / 22.0));

    PenaltyParams params = params_in;
    AnnealResult result;
    if (schedule.t0 > 0.0) {
        result.t0_used = schedule.t0;
    } else {
        const T0Result t0 = find_t0(moves, eval, params, schedule.seed);
        result.t0_used = t0.t0;
        result.t0_degenerate = t0.degenerate;
        if (params.mode == PenaltyMode::StaticConstant && params.static_penalty <= 0.0)
            params.static_penalty = 10.0 * std::max(t0.scale, 1e-300);
    }
    if (params.mode == PenaltyMode::StaticConstant && params.static_penalty <= 0.0)
        params.static_penalty = 1.0;

    std::vector<std::future<RestartOutcome>> jobs;
    for (int r = 0; r < schedule.restarts; ++r)
        jobs.push_back(std::async(std::launch::async, [&, r] {
            return run_chain(moves, params, schedule, eval, r, result.t0_used, proposals);
        }));

    for (auto& job : jobs) {
        RestartOutcome o = job.get();
        result.evaluations += o.evaluations;
        result.trace.insert(result.trace.end(), o.trace.begin(), o.trace.end());
        if (o.found && o.best_pi < result.best_pi) {
            result.best = o.best;
            result.best_pi = o.best_pi;
            result.best_dc = o.best_dc;
            result.found_feasible = true;
        }
    }
    return result;
}

ExhaustiveResult exhaustive_search(const Workspace& ws, int n_rn, double d_max,
                                   const Evaluator& eval, std::uint64_t cap) {
    const int S = static_cast<int>(ws.sites.size());
    const int np = ws.sc.target_dbm.count();
    const int nb = ws.sc.bias_db.count();

    double combos = static_cast<double>(np) * np * nb;
    for (int i = 0; i < n_rn; ++i) combos *= static_cast<double>(S - i) / (i + 1);
    if (combos > static_cast<double>(cap))
        throw std::runtime_error("exhaustive_search: space larger than the cap");

    ExhaustiveResult out;
    std::vector<int> comb(n_rn);
    for (int i = 0; i < n_rn; ++i) comb[i] = i;
    while (true) {
        for (int pe = 0; pe < np; ++pe)
            for (int pr = 0; pr < np; ++pr)
                for (int b = 0; b < nb; ++b) {
                    Configuration x;
                    x.rn_sites = comb;
                    x.p_enb_idx = pe;
                    x.p_rn_idx = pr;
                    x.bias_idx = b;
                    ++out.count;
                    const EnergyPoint e = eval(x);
                    if (e.feasible && e.dc <= d_max && e.pi < out.best_pi) {
                        out.best = x;
                        out.best_pi = e.pi;
                        out.best_dc = e.dc;
                        out.found_feasible = true;
                    }
                }
        if (n_rn == 0) break;
        // next site combination in lexicographic order
        int i = n_rn - 1;
        while (i >= 0 && comb[i] == S - n_rn + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < n_rn; ++j) comb[j] = comb[j - 1] + 1;
    }
    return out;
}

Baseline enb_only_baseline(const Workspace& ws, const Evaluator& eval) {
    Baseline base;
    for (int pe = 0; pe < ws.sc.target_dbm.count(); ++pe) {
        Configuration x;
        x.p_enb_idx = pe;
        const EnergyPoint e = eval(x);
        if (e.feasible && e.pi < base.pi) {
            base.x = x;
            base.pi = e.pi;
            base.dc = e.dc;
            base.found = true;
        }
    }
    return base;
}

GibbsReport gibbs_concentration_check(const GibbsToy& toy, int stages) {
    if (toy.objective.size() != toy.delay.size() || toy.objective.empty())
        throw std::invalid_argument("gibbs check: objective/delay tables must match");
    const std::size_t n = toy.objective.size();

    GibbsReport rep;
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i)
        if (toy.delay[i] <= toy.d_max) best = std::min(best, toy.objective[i]);
    if (!std::isfinite(best)) {
        rep.empty_feasible = true;
        return rep;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (toy.delay[i] <= toy.d_max && toy.objective[i] <= best + 1e-12 * (1.0 + std::fabs(best)))
            rep.optimum.push_back(i);

    std::vector<double> shape(n, 0.0);  // the penalty's x-dependence, zero on the feasible set
    for (std::size_t i = 0; i < n; ++i)
        if (toy.delay[i] > toy.d_max)
            shape[i] = toy.objective[i] / toy.d_max * (toy.delay[i] - toy.d_max);

    for (int m = 1; m <= stages; ++m) {
        const double t = 1.0 / m;
        const double mu_t = std::log(static_cast<double>(m) + 1.0);
        std::vector<double> expo(n);
        double emin = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            expo[i] = toy.objective[i] / t + mu_t * shape[i];
            emin = std::min(emin, expo[i]);
        }
        double z = 0.0, mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = std::exp(-(expo[i] - emin));
            z += w;
            if (toy.delay[i] <= toy.d_max &&
                toy.objective[i] <= best + 1e-12 * (1.0 + std::fabs(best)))
                mass += w;
        }
        rep.stages.push_back({m, t, mu_t, mass / z});
    }
    rep.final_mass = rep.stages.back().mass_on_optimum;
    return rep;
}

}  // namespace relaysim
