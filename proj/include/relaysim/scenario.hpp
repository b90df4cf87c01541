// scenario.hpp - network description, optimizer decision point, association
// and the precomputed per-scenario workspace shared by all evaluations.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "relaysim/capacity.hpp"
#include "relaysim/channel.hpp"
#include "relaysim/geometry.hpp"

namespace relaysim {

enum class StationKind { Enb, Rn };

struct Station {
    int id = 0;
    StationKind kind = StationKind::Enb;
    Point pos;
    int cell = 0;
    int donor = -1;            // station id of the donor eNB (RNs only)
    double pilot_dbm = 43.0;   // downlink pilot used for association
    double backhaul_dbm = 30.0;  // RN backhaul transmit power (no power control)
};

struct TrafficProfile {
    enum class Type { Uniform, Hotspot };
    Type type = Type::Uniform;
    Point center;        // hotspot only
    double sigma_m = 100.0;
    double mass = 0.0;   // peak amplitude relative to the uniform floor
};

struct RangeGrid {
    double min = 0.0, max = 0.0, step = 1.0;
    int count() const { return static_cast<int>(std::llround((max - min) / step)) + 1; }
    double value(int i) const { return min + i * step; }
};

struct Scenario {
    int format = 1;
    std::uint64_t rng_seed = 1;
    int cell_of_interest = 0;   // station id of the donor eNB of cell c

    Rect extent;
    double pixel_size = 20.0;
    double candidate_step = 50.0;

    double traffic_mean = 5.0;  // omega-bar, bits/s/m^2
    double flow_bits = 1e6;     // xi
    TrafficProfile profile;

    double backhaul_quota = 0.1;  // beta
    double noise_w = 2.29e-15;    // per RB
    double tmax_w = 0.2;          // UE power cap
    int mqs_window = 10;          // W
    int rb_count = 50;

    RangeGrid bias_db{0.0, 15.0, 1.0};
    RangeGrid target_dbm{-105.0, -75.0, 3.0};

    CapacityTable capacity = CapacityTable::default_table(50, 1e3);
    ChannelModel channel;

    double rn_pilot_dbm = 30.0;     // template for configuration RNs in cell c
    double rn_backhaul_dbm = 30.0;

    std::vector<Station> stations;

    const Station& station_by_id(int id) const;
    void validate() const;  // throws std::runtime_error naming the offending field
};

// Parses the documented JSON scenario format (format = 1) and validates it.
Scenario load_scenario(const std::string& path);

// Optimizer decision point: RN sites in cell c plus network-wide targets/bias.
struct Configuration {
    std::vector<int> rn_sites;  // candidate-site indices, no duplicates
    int p_enb_idx = 0;          // index into target_dbm grid
    int p_rn_idx = 0;
    int bias_idx = 0;

    bool operator==(const Configuration& o) const = default;
};

// Canonical (site-order independent) hash for evaluation caches.
std::uint64_t config_key(const Configuration& x);

struct ActiveStation {
    int id = 0;                 // static id, or K0 + slot for configuration RNs
    StationKind kind = StationKind::Enb;
    Point pos;
    int cell = 0;
    int donor_index = -1;       // index into the active list (RNs only)
    int site = -1;              // candidate-site index (configuration RNs only)
    int static_index = -1;      // index into Scenario::stations, -1 for config RNs
    double pilot_w = 0.0;
    double backhaul_w = 0.0;
};

struct AssociationMap {
    std::vector<std::int32_t> server;  // active-station index per pixel
    std::vector<double> area;          // A_k, m^2
    std::vector<double> phi_mass;      // Phi_k (dimensionless)
};

// Immutable per-scenario precompute: pixel grid, traffic field, candidate
// sites, and every channel gain the evaluator will ever need. Safe to share
// across threads.
struct Workspace {
    Scenario sc;
    PixelGrid grid;
    std::vector<double> phi;   // normalized: grid average == 1

    int K0 = 0;                // static station count
    int enb_c = -1;            // static index of the cell-c eNB

    std::vector<Point> sites;                       // candidate RN sites in cell c
    std::vector<std::array<int, 8>> site_neighbors; // lattice neighbors, -1 when absent

    // UE-link gains, [station][pixel] and [site][pixel]
    std::vector<std::vector<double>> gain_static;
    std::vector<std::vector<double>> gain_site;
    // association metric without bias: pilot_w * gain
    std::vector<std::vector<double>> pilot_static;
    std::vector<std::vector<double>> pilot_site;
    // backhaul gains towards each static eNB column
    std::vector<std::vector<double>> bh_gain_static;  // [static RN][static eNB]
    std::vector<std::vector<double>> bh_gain_site;    // [site][static eNB]

    std::vector<std::uint8_t> cellc_mask;  // unbiased eNB-only region of cell c

    double pilot_of(int active_index, const std::vector<ActiveStation>& act,
                    std::size_t pixel) const {
        const ActiveStation& a = act[active_index];
        return a.static_index >= 0 ? pilot_static[a.static_index][pixel]
                                   : pilot_site[a.site][pixel];
    }
    double gain_of(int active_index, const std::vector<ActiveStation>& act,
                   std::size_t pixel) const {
        const ActiveStation& a = act[active_index];
        return a.static_index >= 0 ? gain_static[a.static_index][pixel]
                                   : gain_site[a.site][pixel];
    }
};

Workspace build_workspace(Scenario sc);

// Candidate grid clipped to cell c (unbiased eNB-only region), eNB site excluded.
// Throws when the grid step leaves no candidates.
std::vector<Point> enumerate_candidates(const Scenario& sc);

// Stations active under configuration x: all static stations plus the
// configuration RNs of cell c (donor = cell-c eNB).
std::vector<ActiveStation> active_stations(const Workspace& ws, const Configuration& x);

// Highest biased pilot wins; bias is 1 for eNBs and the configured B for all
// RNs; exact ties go to the lowest station id.
AssociationMap build_association(const Workspace& ws, const Configuration& x);
AssociationMap build_association(const Workspace& ws, const Configuration& x,
                                 const std::vector<ActiveStation>& act);

void validate_configuration(const Workspace& ws, const Configuration& x);

}  // namespace relaysim
