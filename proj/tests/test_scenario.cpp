#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "relaysim/scenario.hpp"
#include "scenes.hpp"

using namespace relaysim;

namespace {

const std::string kSevenCell = std::string(RELAYSIM_SCENARIO_DIR) + "/seven_cell.json";

// brute-force candidate count: lattice points whose unbiased eNB-only winner
// is the cell-c eNB, minus the eNB site itself
std::size_t brute_force_candidates(const Scenario& sc) {
    const PixelGrid grid(sc.extent, sc.pixel_size);
    const Station& enb_c = sc.station_by_id(sc.cell_of_interest);
    std::size_t count = 0;
    const double step = sc.candidate_step;
    const int ni = static_cast<int>(std::ceil(std::max(sc.extent.width(), sc.extent.height()) / step));
    for (int iy = -ni; iy <= ni; ++iy) {
        for (int ix = -ni; ix <= ni; ++ix) {
            if (ix == 0 && iy == 0) continue;
            const Point q{enb_c.pos.x + ix * step, enb_c.pos.y + iy * step};
            if (!sc.extent.contains(q)) continue;
            double best = -1.0;
            int best_id = -1;
            for (const Station& s : sc.stations) {
                if (s.kind != StationKind::Enb) continue;
                const double m = dbm_to_w(s.pilot_dbm) *
                                 gain(sc.channel, LinkClass::UeToEnb, q, s.pos,
                                      grid.index_of(q), static_cast<std::uint64_t>(s.id));
                if (m > best) { best = m; best_id = s.id; }
            }
            if (best_id == enb_c.id) ++count;
        }
    }
    return count;
}

}  // namespace

TEST_CASE("default seven-cell file loads: 7 eNBs, center at origin, ring at 500 m") {
    const Scenario sc = load_scenario(kSevenCell);
    CHECK(sc.stations.size() == 7);
    for (const Station& s : sc.stations) CHECK(s.kind == StationKind::Enb);
    CHECK(sc.station_by_id(0).pos.x == 0.0);
    CHECK(sc.station_by_id(0).pos.y == 0.0);
    for (int id = 1; id <= 6; ++id) {
        const Station& s = sc.station_by_id(id);
        CHECK(std::hypot(s.pos.x, s.pos.y) == doctest::Approx(500.0).epsilon(1e-12));
    }
    CHECK(sc.traffic_mean == 5.0);
    CHECK(sc.backhaul_quota == 0.1);
}

TEST_CASE("scenario validation reports the offending field") {
    Scenario sc = testscenes::two_cell();
    sc.backhaul_quota = 1.2;
    CHECK_THROWS_WITH_AS(sc.validate(), doctest::Contains("backhaul_quota"), std::runtime_error);

    sc = testscenes::two_cell();
    sc.mqs_window = 1;  // MQS degenerate
    CHECK_THROWS_WITH_AS(sc.validate(), doctest::Contains("mqs_window"), std::runtime_error);

    sc = testscenes::two_cell();
    sc.stations[1].kind = StationKind::Rn;  // RN without donor
    CHECK_THROWS_AS(sc.validate(), std::runtime_error);

    CHECK_THROWS_AS(load_scenario("/nonexistent/file.json"), std::runtime_error);
}

TEST_CASE("loading the same file twice gives structurally identical scenarios") {
    const Scenario a = load_scenario(kSevenCell);
    const Scenario b = load_scenario(kSevenCell);
    CHECK(a.stations.size() == b.stations.size());
    CHECK(a.rng_seed == b.rng_seed);
    CHECK(a.traffic_mean == b.traffic_mean);
    const Workspace wa = build_workspace(a);
    const Workspace wb = build_workspace(b);
    CHECK(wa.sites.size() == wb.sites.size());
    REQUIRE(wa.phi.size() == wb.phi.size());
    for (std::size_t p = 0; p < wa.phi.size(); ++p) CHECK(wa.phi[p] == wb.phi[p]);
    for (int k = 0; k < wa.K0; ++k)
        for (std::size_t p = 0; p < wa.phi.size(); p += 97)
            CHECK(wa.gain_static[k][p] == wb.gain_static[k][p]);
}

TEST_CASE("traffic field is normalized to network average 1") {
    for (auto mass : {0.0, 4.0}) {
        Scenario sc = testscenes::two_cell();
        if (mass > 0.0) {
            sc.profile.type = TrafficProfile::Type::Hotspot;
            sc.profile.center = {115.0, 143.0};
            sc.profile.sigma_m = 80.0;
            sc.profile.mass = mass;
        }
        const Workspace ws = build_workspace(sc);
        double mean = 0.0;
        for (double v : ws.phi) mean += v;
        mean /= static_cast<double>(ws.phi.size());
        CHECK(mean == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("candidate enumeration") {
    const Scenario sc = testscenes::two_cell();
    SUBCASE("count equals the brute-force region count") {
        const auto sites = enumerate_candidates(sc);
        CHECK(sites.size() == brute_force_candidates(sc));
        CHECK(sites.size() > 10);
        for (const Point& q : sites)
            CHECK(distance(q, sc.stations[0].pos) > 1.0);  // eNB site excluded
    }
    SUBCASE("degenerate step leaves no candidates") {
        Scenario big = sc;
        big.candidate_step = 5000.0;  // beyond the extent
        CHECK_THROWS_AS(enumerate_candidates(big), std::runtime_error);
    }
    SUBCASE("halving the step strictly increases the candidate count") {
        Scenario fine = sc;
        fine.candidate_step = sc.candidate_step / 2.0;
        CHECK(enumerate_candidates(fine).size() > enumerate_candidates(sc).size());
    }
}

TEST_CASE("association") {
    const Workspace ws = build_workspace(testscenes::two_cell());
    Configuration x;
    x.rn_sites = {0};

    SUBCASE("partition: every pixel has one server, areas sum to the extent") {
        const AssociationMap am = build_association(ws, x);
        double total = 0.0;
        for (double a : am.area) total += a;
        CHECK(total == doctest::Approx(ws.grid.total_area()).epsilon(1e-12));
        for (auto s : am.server) CHECK(s >= 0);
    }
    SUBCASE("raising the bias never shrinks the RN-served set") {
        Configuration lo = x, hi = x;
        lo.bias_idx = 0;
        hi.bias_idx = ws.sc.bias_db.count() - 1;
        const AssociationMap a = build_association(ws, lo);
        const AssociationMap b = build_association(ws, hi);
        const int rn = ws.K0;  // the configuration RN's active index
        for (std::size_t p = 0; p < ws.grid.size(); ++p)
            if (a.server[p] == rn) CHECK(b.server[p] == rn);
        CHECK(b.area[rn] >= a.area[rn]);
    }
    SUBCASE("pixel at the eNB stays on the eNB under zero bias") {
        const AssociationMap am = build_association(ws, x);
        const std::size_t at_enb = ws.grid.index_of(ws.sc.stations[0].pos);
        CHECK(am.server[at_enb] == 0);
    }
    SUBCASE("determinism: identical inputs, identical map") {
        const AssociationMap a = build_association(ws, x);
        const AssociationMap b = build_association(ws, x);
        for (std::size_t p = 0; p < ws.grid.size(); ++p) CHECK(a.server[p] == b.server[p]);
    }
    SUBCASE("exact pilot ties go to the lowest station id") {
        // two co-sited eNBs with equal pilots and no shadowing tie everywhere
        Scenario sc = testscenes::two_cell();
        sc.stations[1].pos = sc.stations[0].pos;
        sc.stations[1].cell = 0;
        sc.channel.ue_enb.shadow_std_db = 0.0;
        const Workspace w2 = build_workspace(sc);
        Configuration none;
        const AssociationMap am = build_association(w2, none);
        for (std::size_t p = 0; p < w2.grid.size(); ++p) CHECK(am.server[p] == 0);
    }
}

TEST_CASE("configuration validation") {
    const Workspace ws = build_workspace(testscenes::two_cell());
    Configuration x;
    x.rn_sites = {3, 3};
    CHECK_THROWS_WITH_AS(validate_configuration(ws, x), doctest::Contains("one candidate site"),
                         std::runtime_error);
    x.rn_sites = {static_cast<int>(ws.sites.size())};
    CHECK_THROWS_AS(validate_configuration(ws, x), std::runtime_error);
    x.rn_sites = {0};
    x.bias_idx = 99;
    CHECK_THROWS_AS(validate_configuration(ws, x), std::runtime_error);
}
