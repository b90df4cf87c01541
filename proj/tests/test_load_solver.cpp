#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "relaysim/load_solver.hpp"
#include "relaysim/rng.hpp"
#include "scenes.hpp"

using namespace relaysim;

namespace {

// independent route for the no-interference load: z-axis trapezoid of
// p(z) * factor(F(z)) / C(z) with analytic interference-free parameters
double reduction_load_oracle(const Workspace& ws, const EvalContext& ctx) {
    const Scenario& sc = ws.sc;
    const double mu = std::log(ctx.p_enb_w / sc.noise_w) - 0.5 * std::log(2.0);
    const double sigma = std::sqrt(std::log(2.0));
    const LognormalParams base{mu, sigma};
    const double phi_mass = ctx.assoc.phi_mass[0];

    const auto expectation = [&](double own) {
        const int n = 200000;
        const double lo = mu - 8.0 * sigma, hi = mu + 8.0 * sigma;
        const double dl = (hi - lo) / n;
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double lz = lo + i * dl;
            const double z = std::exp(lz);
            const double pdf = std::exp(-0.5 * std::pow((lz - mu) / sigma, 2)) /
                               (z * sigma * std::sqrt(2.0 * M_PI));
            const double f = sched_density_factor(base.cdf(z), sc.mqs_window, own) /
                             sc.capacity.rate_at_linear(z);
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            acc += w * pdf * f * z * dl;  // log-axis measure
        }
        return acc;
    };
    // solve rho = omega Phi / (1-beta) E(rho) by damped iteration
    double own = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double v = sc.traffic_mean * phi_mass / (1.0 - sc.backhaul_quota) * expectation(own);
        if (std::fabs(v - own) < 1e-10) return v;
        own = 0.5 * (own + v);
    }
    return own;
}

}  // namespace

TEST_CASE("interference moments on a real scene") {
    const Workspace ws = build_workspace(testscenes::two_cell());
    Configuration x;
    EvalContext ctx = make_context(ws, x);

    SUBCASE("no active interferers") {
        const auto im = interference_moments(ctx, {0.0, 0.0}, 0);
        CHECK(im.m1 == 0.0);
        CHECK(im.m2 == 0.0);
    }
    SUBCASE("scaling every interferer power scales M1 linearly, M2 quadratically") {
        REQUIRE(ctx.clamped_px[0].empty());
        REQUIRE(ctx.clamped_px[1].empty());
        Configuration hot = x;
        hot.p_enb_idx = 1;  // one 5 dB grid step up
        EvalContext ctx2 = make_context(ws, hot);
        REQUIRE(ctx2.clamped_px[0].empty());
        REQUIRE(ctx2.clamped_px[1].empty());
        const double c = db_to_lin(5.0);
        const auto a = interference_moments(ctx, {0.0, 0.37}, 0);
        const auto b = interference_moments(ctx2, {0.0, 0.37}, 0);
        CHECK(b.m1 == doctest::Approx(c * a.m1).epsilon(1e-9));
        CHECK(b.m2 == doctest::Approx(c * c * a.m2).epsilon(1e-9));
    }
}

TEST_CASE("access load") {
    SUBCASE("empty serving area carries no load") {
        Scenario sc = testscenes::two_cell();
        sc.stations[1].pos = sc.stations[0].pos;  // co-sited, loses every tie
        sc.stations[1].cell = 0;
        sc.channel.ue_enb.shadow_std_db = 0.0;
        const Workspace ws = build_workspace(sc);
        EvalContext ctx = make_context(ws, Configuration{});
        CHECK(ctx.assoc.phi_mass[1] == 0.0);
        CHECK(access_load(ctx, {0.0, 0.0}, 1) == 0.0);
    }
    SUBCASE("closed-form reduction under uniform traffic, no clamping, no interference") {
        const Workspace ws = build_workspace(testscenes::single_cell(40.0));
        Configuration x;  // lowest target: no pixel clamps in this scene
        EvalContext ctx = make_context(ws, x);
        REQUIRE(ctx.clamped_px[0].empty());
        const double rho = access_load(ctx, {0.0}, 0);
        const double oracle = reduction_load_oracle(ws, ctx);
        CHECK(rho == doctest::Approx(oracle).epsilon(1e-5));
        CHECK(rho > 0.05);  // non-degenerate working point
    }
    SUBCASE("raising an interfering load never lowers the result") {
        const Workspace ws = build_workspace(testscenes::two_cell());
        EvalContext ctx = make_context(ws, Configuration{});
        double prev = -1.0;
        for (double r1 : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
            const double v = access_load(ctx, {0.0, r1}, 0);
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
    }
    SUBCASE("operator range: F_k(rho) <= F_k(1,...,1)") {
        const Workspace ws = build_workspace(testscenes::two_cell());
        EvalContext ctx = make_context(ws, Configuration{});
        const double cap0 = access_load(ctx, {0.0, 1.0}, 0);
        const double cap1 = access_load(ctx, {1.0, 0.0}, 1);
        Rng rng(5);
        for (int i = 0; i < 25; ++i) {
            const std::vector<double> rho{rng.uniform(), rng.uniform()};
            CHECK(access_load(ctx, rho, 0) <= cap0 + 1e-12);
            CHECK(access_load(ctx, rho, 1) <= cap1 + 1e-12);
        }
    }
}

TEST_CASE("fixed point") {
    SUBCASE("zero traffic converges to zero immediately") {
        Scenario sc = testscenes::two_cell(0.0);
        const Workspace ws = build_workspace(sc);
        EvalContext ctx = make_context(ws, Configuration{});
        const LoadState ls = fixed_point(ctx);
        CHECK(ls.converged);
        CHECK(ls.iterations == 1);
        for (double r : ls.rho) CHECK(r == 0.0);
    }
    SUBCASE("mirror-symmetric cells carry equal loads") {
        Scenario sc = testscenes::two_cell();
        sc.channel.ue_enb.shadow_std_db = 0.0;
        sc.channel.ue_rn.shadow_std_db = 0.0;
        const Workspace ws = build_workspace(sc);
        EvalContext ctx = make_context(ws, Configuration{});
        const LoadState ls = fixed_point(ctx);
        REQUIRE(ls.converged);
        CHECK(ls.rho[0] == doctest::Approx(ls.rho[1]).epsilon(1e-6));
    }
    SUBCASE("iterates from zero are componentwise non-decreasing") {
        const Workspace ws = build_workspace(testscenes::two_cell());
        Configuration x;
        x.rn_sites = {0, 5};
        x.bias_idx = 3;
        EvalContext ctx = make_context(ws, x);
        const LoadState ls = fixed_point(ctx);
        REQUIRE(ls.converged);
        for (std::size_t t = 1; t < ls.history.size(); ++t)
            for (std::size_t k = 0; k < ls.history[t].size(); ++k)
                CHECK(ls.history[t][k] >= ls.history[t - 1][k] - 1e-9);
    }
    SUBCASE("overload is flagged as unstable") {
        Scenario sc = testscenes::two_cell(500.0);
        const Workspace ws = build_workspace(sc);
        EvalContext ctx = make_context(ws, Configuration{});
        const LoadState ls = fixed_point(ctx);
        CHECK_FALSE(ls.stable);
        CHECK_FALSE(ls.feasible());
    }
    SUBCASE("iteration cap reports non-convergence") {
        const Workspace ws = build_workspace(testscenes::two_cell());
        EvalContext ctx = make_context(ws, Configuration{});
        FixedPointOptions opts;
        opts.max_iter = 1;
        opts.tol = 1e-12;
        const LoadState ls = fixed_point(ctx, opts);
        CHECK_FALSE(ls.converged);
        CHECK_FALSE(ls.feasible());
    }
}

TEST_CASE("backhaul scheduling combinations") {
    const CapacityTable table = CapacityTable::default_table(50, 1e3);

    SUBCASE("two cells, one RN each: 4 combinations, total probability 1") {
        BackhaulProblem pb;
        pb.noise_w = 1e-15;
        pb.table = &table;
        pb.p_rx = {{2e-9}, {3e-9}};
        pb.p_int = {{{0.0, 0.0}, {0.0, 4e-13}}, {{0.0, 5e-13}, {0.0, 0.0}}};
        pb.ps = {{0.4, 0.6}, {0.25, 0.75}};
        const BackhaulRates r = backhaul_rates(pb, 1000, 0, 1);
        CHECK_FALSE(r.used_mc);
        CHECK(r.v_total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.r[0][0] > 0.0);
        CHECK(r.r[1][0] > 0.0);
    }
    SUBCASE("single cell without interferers: R equals C(SNR) exactly") {
        BackhaulProblem pb;
        pb.noise_w = 1e-15;
        pb.table = &table;
        pb.p_rx = {{2e-9}};
        pb.p_int = {{{0.0, 0.0}}};
        pb.ps = {{0.3, 0.7}};
        const BackhaulRates r = backhaul_rates(pb, 1000, 0, 1);
        CHECK(r.r[0][0] == doctest::Approx(table.rate_at_linear(2e-9 / 1e-15)).epsilon(1e-12));
    }
    SUBCASE("Monte-Carlo fallback agrees with exact enumeration within 1%") {
        BackhaulProblem pb;
        pb.noise_w = 2e-15;
        pb.table = &table;
        pb.p_rx = {{1.5e-9, 8e-10}, {2.2e-9}};
        pb.p_int = {{{0.0, 0.0, 0.0}, {0.0, 6e-13}},
                    {{0.0, 4e-13, 7e-13}, {0.0, 0.0}}};
        pb.ps = {{0.2, 0.5, 0.3}, {0.45, 0.55}};
        const BackhaulRates exact = backhaul_rates(pb, 1000, 0, 1);
        const BackhaulRates mc = backhaul_rates(pb, 0, 100000, 12345);  // cap 0 forces sampling
        CHECK(mc.used_mc);
        for (std::size_t j = 0; j < exact.r.size(); ++j)
            for (std::size_t i = 0; i < exact.r[j].size(); ++i)
                CHECK(mc.r[j][i] == doctest::Approx(exact.r[j][i]).epsilon(0.01));
    }
}

TEST_CASE("backhaul load formula") {
    // omega=5, beta=0.1, Phi=1e4 m^2, R=1e7: (omega/beta) * Phi/R = 0.05
    CHECK(backhaul_load_from_rates(5.0, 0.1, {1e4}, {1e7}) ==
          doctest::Approx(0.05).epsilon(1e-12));
    // linear in omega
    CHECK(backhaul_load_from_rates(10.0, 0.1, {1e4}, {1e7}) ==
          doctest::Approx(0.1).epsilon(1e-12));
    // empty RN set -> no backhaul load
    CHECK(backhaul_load_from_rates(5.0, 0.1, {}, {}) == 0.0);
}

TEST_CASE("backhaul solve on a scene") {
    SUBCASE("no RNs anywhere: zero backhaul loads") {
        const Workspace ws = build_workspace(testscenes::two_cell());
        EvalContext ctx = make_context(ws, Configuration{});
        LoadState ls = fixed_point(ctx);
        REQUIRE(ls.feasible());
        for (double r : ls.rho_bl) CHECK(r == 0.0);
    }
    SUBCASE("mirror-symmetric static RNs get equal rates and loads") {
        Scenario sc = testscenes::sa_desk();
        sc.channel.ue_enb.shadow_std_db = 0.0;
        sc.channel.ue_rn.shadow_std_db = 0.0;
        sc.channel.rn_enb.shadow_std_db = 0.0;
        sc.stations.push_back({2, StationKind::Rn, {-100.0, 0.0}, 0, 0, 30.0, 30.0});
        sc.stations.push_back({3, StationKind::Rn, {100.0, 0.0}, 1, 1, 30.0, 30.0});
        const Workspace ws = build_workspace(sc);
        EvalContext ctx = make_context(ws, Configuration{});
        LoadState ls = fixed_point(ctx);
        REQUIRE(ls.feasible());
        REQUIRE(ls.r_bl.size() == 2);
        CHECK(ls.r_bl[0][0] == doctest::Approx(ls.r_bl[1][0]).epsilon(1e-9));
        CHECK(ls.rho_bl[0] == doctest::Approx(ls.rho_bl[1]).epsilon(1e-6));
        CHECK(ls.rho_bl[0] > 0.0);
    }
}
