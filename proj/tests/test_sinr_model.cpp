#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "relaysim/rng.hpp"
#include "relaysim/sinr_model.hpp"

using namespace relaysim;

namespace {

// independent z-axis route: E[f(Z)] for lognormal Z and piecewise-constant f
double lognormal_step_expectation(const LognormalParams& p, const CapacityTable& t) {
    const auto& thr = t.thresholds_linear();
    double acc = 0.0, cdf_lo = 0.0;
    for (std::size_t i = 0; i < thr.size(); ++i) {
        const double c = p.cdf(thr[i]);
        acc += (c - cdf_lo) / t.level_rate(i);
        cdf_lo = c;
    }
    acc += (1.0 - cdf_lo) / t.level_rate(thr.size());
    return acc;
}

// geometric-series oracle for the occupancy weight:
// (1-rho) sum_{U>=1} U (rho Psi)^(U-1), Psi = (W-n)/W
double occupancy_weight_oracle(int W, int n, double rho) {
    const double psi = static_cast<double>(W - n) / W;
    double acc = 0.0;
    for (int u = 1; u < 4000; ++u) acc += u * std::pow(rho * psi, u - 1);
    return (1.0 - rho) * acc;
}

}  // namespace

TEST_CASE("fit_lognormal inverts the moment formulas") {
    const LognormalParams degenerate = fit_lognormal(1.0, 0.0);
    CHECK(degenerate.mu == doctest::Approx(0.0));
    CHECK(degenerate.sigma == doctest::Approx(0.0));

    const LognormalParams p = fit_lognormal(1.0, 1.0);
    CHECK(p.sigma * p.sigma == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(p.mu == doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(fit_lognormal(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(fit_lognormal(-2.0, 1.0), std::domain_error);

    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double m1 = std::exp(4.0 * rng.uniform() - 2.0);
        const double v = std::exp(6.0 * rng.uniform() - 3.0);
        const LognormalParams q = fit_lognormal(m1, v);
        CHECK(q.mean() == doctest::Approx(m1).epsilon(1e-12));
        CHECK(q.variance() == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("interference moment accumulation") {
    SUBCASE("no active interferers") {
        const auto im = accumulate_moments({1.0, 2.0}, {1.0, 4.0}, {0.0, 0.0}, -1);
        CHECK(im.m1 == 0.0);
        CHECK(im.m2 == 0.0);
    }
    SUBCASE("one interferer, constant received power, full load") {
        // Rayleigh power of mean P: variance P^2
        const double P = 3.5e-10;
        const auto im = accumulate_moments({P}, {P * P}, {1.0}, -1);
        CHECK(im.m1 == doctest::Approx(P).epsilon(1e-12));
        CHECK(im.m2 == doctest::Approx(P * P).epsilon(1e-12));
    }
    SUBCASE("doubling transmit powers: M1 x2, M2 x4") {
        const std::vector<double> y{2e-11, 5e-11}, h{3e-21, 8e-21}, rho{0.4, 0.7};
        const auto a = accumulate_moments(y, h, rho, -1);
        std::vector<double> y2 = y, h2 = h;
        for (double& v : y2) v *= 2.0;
        for (double& v : h2) v *= 4.0;  // H is quadratic in T
        const auto b = accumulate_moments(y2, h2, rho, -1);
        CHECK(b.m1 == doctest::Approx(2.0 * a.m1).epsilon(1e-12));
        CHECK(b.m2 == doctest::Approx(4.0 * a.m2).epsilon(1e-12));
    }
    SUBCASE("self entry ignored") {
        const auto im = accumulate_moments({1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, 0);
        CHECK(im.m1 == doctest::Approx(1.0));
    }
}

TEST_CASE("sinr_params") {
    SUBCASE("interference-free reduction") {
        const double signal = 2e-12, noise = 5e-15;
        const auto p = sinr_params(signal, {}, noise);
        CHECK(p.mu ==
              doctest::Approx(std::log(signal / noise) - 0.5 * std::log(2.0)).epsilon(1e-12));
        CHECK(p.sigma == doctest::Approx(std::sqrt(std::log(2.0))).epsilon(1e-12));
    }
    SUBCASE("scale equivariance in the signal") {
        InterferenceMoments im;
        im.m1 = 4e-13;
        im.m2 = 1e-26;
        const auto a = sinr_params(1e-12, im, 1e-15);
        const auto b = sinr_params(7.5e-12, im, 1e-15);
        CHECK(b.mu - a.mu == doctest::Approx(std::log(7.5)).epsilon(1e-12));
        CHECK(b.sigma == doctest::Approx(a.sigma).epsilon(1e-12));
    }
}

TEST_CASE("sched_density_factor") {
    SUBCASE("rho = 0 gives the plain density") {
        for (int W : {2, 5, 10, 50})
            for (double u : {0.0, 0.1, 0.5, 0.9, 1.0})
                CHECK(sched_density_factor(u, W, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("occupancy weight, W=2 n=1 rho=0.5: 8/9 (geometric-series oracle)") {
        // factor(1) keeps only the n = 1 term
        CHECK(sched_density_factor(1.0, 2, 0.5) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
        CHECK(occupancy_weight_oracle(2, 1, 0.5) == doctest::Approx(8.0 / 9.0).epsilon(1e-9));
        for (int W : {3, 7, 12})
            for (double rho : {0.2, 0.6, 0.9})
                CHECK(sched_density_factor(1.0, W, rho) ==
                      doctest::Approx(occupancy_weight_oracle(W, 1, rho)).epsilon(1e-9));
    }
    SUBCASE("n = W term: factor(0) = 1 - rho for all W") {
        for (int W : {2, 4, 9, 33})
            for (double rho : {0.0, 0.3, 0.8})
                CHECK(sched_density_factor(0.0, W, rho) ==
                      doctest::Approx(1.0 - rho).epsilon(1e-12));
    }
    SUBCASE("domain errors") {
        CHECK_THROWS_AS(sched_density_factor(0.5, 1, 0.5), std::domain_error);
        CHECK_THROWS_AS(sched_density_factor(0.5, 10, 1.0), std::domain_error);
        CHECK_THROWS_AS(sched_density_factor(1.5, 10, 0.5), std::domain_error);
    }
}

TEST_CASE("sched_mass matches quadrature of the factor") {
    const auto& [xs, wts] = gauss_legendre_01(256);
    for (int W : {2, 5, 10})
        for (double rho : {0.2, 0.5, 0.8})
            for (double u : {0.05, 0.3, 0.7, 1.0}) {
                double quad = 0.0;
                for (std::size_t i = 0; i < xs.size(); ++i)
                    if (xs[i] <= u) quad += wts[i] * sched_density_factor(xs[i], W, rho);
                // crude cutoff quadrature; only a sanity bracket
                CHECK(sched_mass(u, W, rho) == doctest::Approx(quad).epsilon(0.05));
            }
    // exact endpoints
    CHECK(sched_mass(0.0, 10, 0.5) == 0.0);
    CHECK(sched_mass(1.0, 10, 0.5) ==
          doctest::Approx(sched_total_mass(10, 0.5)).epsilon(1e-12));
}

TEST_CASE("expectation over the scheduled density") {
    SUBCASE("f == 1 returns the total mass (0.92791 at W=10, rho=0.5)") {
        SchedSinrDist d;
        d.base = {0.0, 1.0};
        d.window = 10;
        d.rho = 0.5;
        const double direct = sched_total_mass(10, 0.5);
        // independent finite sum over n
        double oracle = 0.0;
        for (int n = 1; n <= 10; ++n) oracle += 100.0 * 0.5 / std::pow(10.0 - 0.5 * (10 - n), 2);
        oracle /= 10.0;
        CHECK(direct == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(direct == doctest::Approx(0.9279102549).epsilon(1e-8));
        CHECK(expect_over_sched(d, [](double) { return 1.0; }) ==
              doctest::Approx(direct).epsilon(1e-10));
    }
    SUBCASE("normalization identity and the W -> infinity limit") {
        for (int W : {5, 10, 20})
            for (double rho : {0.2, 0.5, 0.8}) {
                SchedSinrDist d;
                d.base = {1.3, 0.8};
                d.window = W;
                d.rho = rho;
                CHECK(expect_over_sched(d, [](double) { return 1.0; }) ==
                      doctest::Approx(sched_total_mass(W, rho)).epsilon(1e-6));
            }
        CHECK(sched_total_mass(1000, 0.5) == doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("rho = 0 reduces to the plain lognormal expectation of 1/C") {
        SchedSinrDist d;
        d.base = {2.0, 1.1};
        d.window = 10;
        d.rho = 0.0;
        const CapacityTable t = CapacityTable::default_table(50, 1e3);
        const double via_masses = expect_inv_capacity(d, t);
        const double via_z_axis = lognormal_step_expectation(d.base, t);
        CHECK(via_masses == doctest::Approx(via_z_axis).epsilon(1e-10));
    }
    SUBCASE("mean-value bound for monotone f at rho = 0") {
        SchedSinrDist d;
        d.base = {0.5, 0.9};
        d.window = 10;
        d.rho = 0.0;
        const auto f = [](double z) { return 1.0 / (1.0 + z); };
        const double v = expect_over_sched(d, f);
        CHECK(v <= f(d.base.quantile(0.001)));
        CHECK(v >= f(d.base.quantile(0.999)));
    }
    SUBCASE("multiuser diversity raises the conditional mean") {
        for (int W : {5, 10, 20})
            for (double rho : {0.1, 0.5, 0.9}) {
                SchedSinrDist d;
                d.base = {0.7, 0.6};
                d.window = W;
                d.rho = rho;
                const double cond_mean = expect_over_sched(d, [](double z) { return z; }) /
                                         sched_total_mass(W, rho);
                CHECK(cond_mean >= d.base.mean() * (1.0 - 1e-9));
            }
    }
    SUBCASE("exact capacity expectation agrees with the generic quadrature") {
        const CapacityTable t = CapacityTable::default_table(50, 1e3);
        SchedSinrDist d;
        d.base = {1.0, 0.9};
        d.window = 10;
        d.rho = 0.5;
        const double exact = expect_inv_capacity(d, t);
        const double generic =
            expect_over_sched(d, [&](double z) { return 1.0 / t.rate_at_linear(z); });
        CHECK(generic == doctest::Approx(exact).epsilon(2e-2));
    }
}

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
    const auto& [x, w] = gauss_legendre_01(256);
    double acc3 = 0.0, acc0 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc0 += w[i];
        acc3 += w[i] * x[i] * x[i] * x[i];
    }
    CHECK(acc0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(acc3 == doctest::Approx(0.25).epsilon(1e-13));
}
