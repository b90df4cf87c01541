#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "relaysim/channel.hpp"
#include "relaysim/load_solver.hpp"
#include "scenes.hpp"

using namespace relaysim;

TEST_CASE("path loss at the reference distance with zero shadowing") {
    ChannelModel m;
    m.ue_enb = {128.1, 3.76, 0.0};
    const double g = gain(m, LinkClass::UeToEnb, {0.0, 0.0}, {1000.0, 0.0}, 0, 1);
    CHECK(lin_to_db(g) == doctest::Approx(-128.1).epsilon(1e-12));
}

TEST_CASE("gain is deterministic and position-keyed") {
    const ChannelModel m = testscenes::two_cell().channel;
    const Point src{12.0, -40.0}, dst{200.0, 100.0};
    const double a = gain(m, LinkClass::UeToEnb, src, dst, 77, 3);
    const double b = gain(m, LinkClass::UeToEnb, src, dst, 77, 3);
    CHECK(a == b);
    // different station key -> different shadowing draw
    const double c = gain(m, LinkClass::UeToEnb, src, dst, 77, 4);
    CHECK(a != c);
    // gains stay in (0, 1]
    for (std::uint64_t px = 0; px < 2000; ++px) {
        const double g = gain(m, LinkClass::UeToRn, {1.0, 1.0}, {2.0, 2.0}, px, 9);
        CHECK(g > 0.0);
        CHECK(g <= 1.0);
    }
}

TEST_CASE("empirical shadowing spread matches the configured sigma") {
    ChannelModel m;
    m.ue_enb = {120.0, 3.5, 7.3};
    m.rng_seed = 99;
    double acc = 0.0, acc2 = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const double s = shadow_db(m, LinkClass::UeToEnb, static_cast<std::uint64_t>(i), 5);
        acc += s;
        acc2 += s * s;
    }
    const double mean = acc / n;
    const double sd = std::sqrt(acc2 / n - mean * mean);
    CHECK(sd == doctest::Approx(7.3).epsilon(0.05));
    CHECK(std::fabs(mean) < 0.3);
}

TEST_CASE("FCPC power control") {
    const Workspace ws = build_workspace(testscenes::two_cell());
    Configuration x;
    x.p_enb_idx = 1;  // -100 dBm
    const auto act = active_stations(ws, x);
    const AssociationMap am = build_association(ws, x, act);
    const TxPowerField tx = fcpc_power(ws, x, am);
    const double target = dbm_to_w(ws.sc.target_dbm.value(x.p_enb_idx));

    SUBCASE("FCPC identity on unclamped pixels, cap on clamped ones") {
        for (std::size_t p = 0; p < ws.grid.size(); ++p) {
            const double g = ws.gain_of(am.server[p], act, p);
            if (tx.clamped[p]) {
                CHECK(tx.power_w[p] == ws.sc.tmax_w);
                CHECK(target / g >= ws.sc.tmax_w);
            } else {
                CHECK(tx.power_w[p] * g == doctest::Approx(target).epsilon(1e-9));
            }
            CHECK(tx.power_w[p] > 0.0);
            CHECK(tx.power_w[p] <= ws.sc.tmax_w);
        }
    }
    SUBCASE("raising the target never lowers any transmit power") {
        Configuration hi = x;
        hi.p_enb_idx = ws.sc.target_dbm.count() - 1;
        const TxPowerField tx_hi = fcpc_power(ws, hi, build_association(ws, hi));
        for (std::size_t p = 0; p < ws.grid.size(); ++p)
            CHECK(tx_hi.power_w[p] >= tx.power_w[p] - 1e-18);
    }
    SUBCASE("clamping branch arithmetic") {
        // G = -100 dB, target -60 dBm needs +40 dBm; cap at 23 dBm wins
        const double need = dbm_to_w(-60.0) / db_to_lin(-100.0);
        CHECK(w_to_dbm(need) == doctest::Approx(40.0).epsilon(1e-9));
        CHECK(std::min(need, dbm_to_w(23.0)) == dbm_to_w(23.0));
        // G = -80 dB, target -60 dBm -> 20 dBm, unclamped
        const double need2 = dbm_to_w(-60.0) / db_to_lin(-80.0);
        CHECK(w_to_dbm(need2) == doctest::Approx(20.0).epsilon(1e-9));
        CHECK(need2 < dbm_to_w(23.0));
    }
}

TEST_CASE("association pilots use the uplink gains (reciprocity)") {
    const Workspace ws = build_workspace(testscenes::two_cell());
    Configuration x;
    const auto act = active_stations(ws, x);
    for (std::size_t p = 0; p < ws.grid.size(); p += 131)
        for (int k = 0; k < ws.K0; ++k)
            CHECK(ws.pilot_of(k, act, p) ==
                  doctest::Approx(act[k].pilot_w * ws.gain_of(k, act, p)).epsilon(1e-15));
}
