// scenes.hpp - programmatic desk-scale scenarios shared by the test suites.

#pragma once

#include "relaysim/scenario.hpp"

namespace relaysim::testscenes {

// Two macro cells side by side; cell 0 is the cell of interest. Loads around
// 0.3-0.5 at the default traffic density, interference-coupled.
inline Scenario two_cell(double omega = 60.0, std::uint64_t seed = 424242) {
    Scenario sc;
    sc.rng_seed = seed;
    sc.cell_of_interest = 0;
    sc.extent = {-520.0, -260.0, 520.0, 260.0};
    sc.pixel_size = 20.0;
    sc.candidate_step = 50.0;
    sc.traffic_mean = omega;
    sc.flow_bits = 1e6;
    sc.backhaul_quota = 0.1;
    sc.noise_w = dbm_to_w(-116.4);
    sc.tmax_w = dbm_to_w(23.0);
    sc.mqs_window = 10;
    sc.rb_count = 50;
    sc.bias_db = {0.0, 15.0, 3.0};
    sc.target_dbm = {-105.0, -80.0, 5.0};
    // below-cutoff fallback rate; the stock 1 kb/s floor makes coupled
    // scenarios outage-dominated (see README on rate_floor_bps)
    sc.capacity = CapacityTable::default_table(sc.rb_count, 2e5);
    sc.channel.ue_enb = {128.1, 3.76, 6.0};
    sc.channel.ue_rn = {128.1, 3.76, 6.0};
    sc.channel.rn_enb = {124.5, 3.53, 3.0};
    sc.channel.rng_seed = seed;
    sc.rn_pilot_dbm = 30.0;
    sc.rn_backhaul_dbm = 30.0;
    sc.stations = {
        {0, StationKind::Enb, {-250.0, 0.0}, 0, -1, 43.0, 30.0},
        {1, StationKind::Enb, {250.0, 0.0}, 1, -1, 43.0, 30.0},
    };
    return sc;
}

// Single isolated cell (no interferers); useful for closed-form reductions.
inline Scenario single_cell(double omega = 40.0, std::uint64_t seed = 7) {
    Scenario sc = two_cell(omega, seed);
    sc.extent = {-400.0, -400.0, 400.0, 400.0};
    sc.stations = {{0, StationKind::Enb, {0.0, 0.0}, 0, -1, 43.0, 30.0}};
    return sc;
}

// Annealer desk scenario: two cells, wider backhaul quota so relay-bearing
// configurations stay delay-feasible under tight constraints.
inline Scenario sa_desk(double omega = 18.0, std::uint64_t seed = 90125,
                        double candidate_step = 100.0) {
    Scenario sc = two_cell(omega, seed);
    sc.candidate_step = candidate_step;
    sc.backhaul_quota = 0.3;
    return sc;
}

}  // namespace relaysim::testscenes
