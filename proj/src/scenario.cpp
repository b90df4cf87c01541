#include "relaysim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace relaysim {

namespace {

// shadow-field keys: static stations use their id, candidate sites a
// disjoint range so a relocated RN sees a fresh realization
constexpr std::uint64_t kSiteKeyBase = 1ull << 20;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw std::runtime_error("scenario: " + field + ": " + what);
}

}  // namespace

const Station& Scenario::station_by_id(int id) const {
    for (const Station& s : stations)
        if (s.id == id) return s;
    throw std::runtime_error("scenario: no station with id " + std::to_string(id));
}

void Scenario::validate() const {
    if (format != 1) fail("format", "unsupported version (expected 1)");
    if (!(backhaul_quota > 0.0 && backhaul_quota < 1.0))
        fail("backhaul_quota", "must lie in (0,1)");
    if (extent.width() <= 0.0 || extent.height() <= 0.0) fail("extent", "degenerate rectangle");
    if (pixel_size <= 0.0) fail("pixel_size", "must be > 0");
    if (candidate_step <= 0.0) fail("candidate_step", "must be > 0");
    if (traffic_mean < 0.0) fail("traffic_mean", "must be >= 0");
    if (flow_bits <= 0.0) fail("flow_bits", "must be > 0");
    if (noise_w <= 0.0) fail("noise_w", "must be > 0");
    if (tmax_w <= 0.0) fail("tmax_w", "must be > 0");
    if (mqs_window < 2) fail("mqs_window", "MQS needs a window of at least 2");
    if (rb_count < 1) fail("rb_count", "must be >= 1");
    for (const auto* g : {&bias_db, &target_dbm}) {
        if (g->step <= 0.0) fail("ranges", "step must be > 0");
        if (g->max < g->min) fail("ranges", "max below min");
    }
    if (profile.type == TrafficProfile::Type::Hotspot) {
        if (profile.sigma_m <= 0.0) fail("traffic.profile.sigma_m", "must be > 0");
        if (profile.mass < 0.0) fail("traffic.profile.mass", "must be >= 0");
    }
    for (const auto& p : {channel.ue_enb, channel.ue_rn, channel.rn_enb}) {
        if (p.exponent <= 0.0) fail("channel.exponent", "must be > 0");
        if (p.shadow_std_db < 0.0) fail("channel.shadow_db", "must be >= 0");
    }

    if (stations.empty()) fail("stations", "at least one eNB required");
    std::set<int> ids;
    bool cell_c_found = false;
    for (const Station& s : stations) {
        const std::string tag = "stations[id=" + std::to_string(s.id) + "]";
        if (!ids.insert(s.id).second) fail(tag, "duplicate station id");
        if (!extent.contains(s.pos)) fail(tag, "position outside the network extent");
        if (s.kind == StationKind::Enb) {
            if (s.donor != -1) fail(tag, "eNBs must not declare a donor");
            if (s.id == cell_of_interest) cell_c_found = true;
        } else {
            if (s.donor < 0) fail(tag, "RN requires a donor eNB");
            const auto it = std::find_if(stations.begin(), stations.end(),
                                         [&](const Station& t) { return t.id == s.donor; });
            if (it == stations.end()) fail(tag, "donor id not found");
            if (it->kind != StationKind::Enb) fail(tag, "donor must be an eNB");
            if (it->cell != s.cell) fail(tag, "donor must be in the same cell");
        }
    }
    if (!cell_c_found) fail("cell_of_interest", "must name an eNB station id");
    if (!std::is_sorted(stations.begin(), stations.end(),
                        [](const Station& a, const Station& b) { return a.id < b.id; }))
        fail("stations", "must be listed in ascending id order");
}

namespace {

using nlohmann::json;

const json& need(const json& j, const char* key, const char* ctx) {
    auto it = j.find(key);
    if (it == j.end())
        throw std::runtime_error(std::string("scenario: missing key '") + ctx + "." + key + "'");
    return *it;
}

PathLossParams parse_pl(const json& j, const char* ctx) {
    PathLossParams p;
    p.intercept_db = need(j, "intercept_db", ctx).get<double>();
    p.exponent = need(j, "exponent", ctx).get<double>();
    p.shadow_std_db = need(j, "shadow_db", ctx).get<double>();
    return p;
}

RangeGrid parse_range(const json& j, const char* ctx) {
    RangeGrid g;
    g.min = need(j, "min", ctx).get<double>();
    g.max = need(j, "max", ctx).get<double>();
    g.step = need(j, "step", ctx).get<double>();
    return g;
}

std::string dirname_of(const std::string& path) {
    auto pos = path.find_last_of("/\\");
    return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

}  // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scenario: cannot open " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("scenario: parse error in " + path + ": " + e.what());
    }

    Scenario sc;
    sc.format = need(j, "format", "").get<int>();
    sc.rng_seed = need(j, "rng_seed", "").get<std::uint64_t>();
    sc.cell_of_interest = j.value("cell_of_interest", 0);

    const json& geo = need(j, "geometry", "");
    const auto ext = need(geo, "extent_m", "geometry").get<std::vector<double>>();
    if (ext.size() != 4) throw std::runtime_error("scenario: geometry.extent_m needs 4 values");
    sc.extent = {ext[0], ext[1], ext[2], ext[3]};
    sc.pixel_size = need(geo, "pixel_m", "geometry").get<double>();
    sc.candidate_step = need(geo, "candidate_step_m", "geometry").get<double>();

    const json& tr = need(j, "traffic", "");
    sc.traffic_mean = need(tr, "mean_bps_per_m2", "traffic").get<double>();
    sc.flow_bits = need(tr, "flow_bits", "traffic").get<double>();
    if (tr.contains("profile")) {
        const json& pr = tr["profile"];
        const std::string type = need(pr, "type", "traffic.profile").get<std::string>();
        if (type == "uniform") {
            sc.profile.type = TrafficProfile::Type::Uniform;
        } else if (type == "hotspot") {
            sc.profile.type = TrafficProfile::Type::Hotspot;
            const auto c = need(pr, "center_m", "traffic.profile").get<std::vector<double>>();
            if (c.size() != 2) throw std::runtime_error("scenario: hotspot center needs 2 values");
            sc.profile.center = {c[0], c[1]};
            sc.profile.sigma_m = need(pr, "sigma_m", "traffic.profile").get<double>();
            sc.profile.mass = need(pr, "mass", "traffic.profile").get<double>();
        } else {
            throw std::runtime_error("scenario: traffic.profile.type: unknown '" + type + "'");
        }
    }

    const json& rad = need(j, "radio", "");
    sc.backhaul_quota = need(rad, "backhaul_quota", "radio").get<double>();
    sc.noise_w = dbm_to_w(need(rad, "noise_dbm", "radio").get<double>());
    sc.tmax_w = dbm_to_w(need(rad, "tmax_dbm", "radio").get<double>());
    sc.mqs_window = need(rad, "mqs_window", "radio").get<int>();
    sc.rb_count = rad.value("rb_count", 50);
    const double floor_bps = rad.value("rate_floor_bps", 1e3);

    const json& rg = need(j, "ranges", "");
    sc.bias_db = parse_range(need(rg, "bias_db", "ranges"), "ranges.bias_db");
    sc.target_dbm = parse_range(need(rg, "target_dbm", "ranges"), "ranges.target_dbm");

    if (j.contains("capacity_csv")) {
        const std::string rel = j["capacity_csv"].get<std::string>();
        sc.capacity = CapacityTable::from_csv(dirname_of(path) + "/" + rel, sc.rb_count, floor_bps);
    } else {
        sc.capacity = CapacityTable::default_table(sc.rb_count, floor_bps);
    }

    const json& ch = need(j, "channel", "");
    sc.channel.ue_enb = parse_pl(need(ch, "ue_enb", "channel"), "channel.ue_enb");
    sc.channel.ue_rn = parse_pl(need(ch, "ue_rn", "channel"), "channel.ue_rn");
    sc.channel.rn_enb = parse_pl(need(ch, "rn_enb", "channel"), "channel.rn_enb");
    sc.channel.rng_seed = sc.rng_seed;

    if (j.contains("rn_template")) {
        sc.rn_pilot_dbm = need(j["rn_template"], "pilot_dbm", "rn_template").get<double>();
        sc.rn_backhaul_dbm = need(j["rn_template"], "backhaul_dbm", "rn_template").get<double>();
    }

    for (const json& js : need(j, "stations", "")) {
        Station s;
        s.id = need(js, "id", "stations").get<int>();
        const std::string kind = need(js, "kind", "stations").get<std::string>();
        if (kind == "enb") s.kind = StationKind::Enb;
        else if (kind == "rn") s.kind = StationKind::Rn;
        else throw std::runtime_error("scenario: stations.kind: unknown '" + kind + "'");
        const auto p = need(js, "pos_m", "stations").get<std::vector<double>>();
        if (p.size() != 2) throw std::runtime_error("scenario: stations.pos_m needs 2 values");
        s.pos = {p[0], p[1]};
        s.cell = need(js, "cell", "stations").get<int>();
        s.donor = js.value("donor", -1);
        s.pilot_dbm = js.value("pilot_dbm", s.kind == StationKind::Enb ? 43.0 : sc.rn_pilot_dbm);
        s.backhaul_dbm = js.value("backhaul_dbm", sc.rn_backhaul_dbm);
        sc.stations.push_back(s);
    }

    sc.validate();
    return sc;
}

std::uint64_t config_key(const Configuration& x) {
    std::vector<int> sites = x.rn_sites;
    std::sort(sites.begin(), sites.end());
    std::uint64_t h = 0x243F6A8885A308D3ULL;
    for (int s : sites) h = hash_combine(h, static_cast<std::uint64_t>(s) + 2);
    h = hash_combine(h, static_cast<std::uint64_t>(x.p_enb_idx) + 3);
    h = hash_combine(h, static_cast<std::uint64_t>(x.p_rn_idx) + 5);
    h = hash_combine(h, static_cast<std::uint64_t>(x.bias_idx) + 7);
    return h;
}

std::vector<Point> enumerate_candidates(const Scenario& sc) {
    const PixelGrid grid(sc.extent, sc.pixel_size);
    const Station& enb_c = sc.station_by_id(sc.cell_of_interest);
    const double step = sc.candidate_step;

    std::vector<const Station*> enbs;
    for (const Station& s : sc.stations)
        if (s.kind == StationKind::Enb) enbs.push_back(&s);

    std::vector<Point> out;
    const int ni = static_cast<int>(std::ceil(std::max(sc.extent.width(), sc.extent.height()) / step));
    for (int iy = -ni; iy <= ni; ++iy) {
        for (int ix = -ni; ix <= ni; ++ix) {
            if (ix == 0 && iy == 0) continue;  // the eNB site itself
            const Point q{enb_c.pos.x + ix * step, enb_c.pos.y + iy * step};
            if (!sc.extent.contains(q)) continue;
            // unbiased eNB-only association decides cell-c membership
            const std::size_t px = grid.index_of(q);
            double best = -1.0;
            int best_id = -1;
            for (const Station* e : enbs) {
                const double m = dbm_to_w(e->pilot_dbm) *
                                 gain(sc.channel, LinkClass::UeToEnb, q, e->pos, px,
                                      static_cast<std::uint64_t>(e->id));
                if (m > best) { best = m; best_id = e->id; }
            }
            if (best_id == enb_c.id) out.push_back(q);
        }
    }
    if (out.empty())
        throw std::runtime_error("scenario: candidate grid step leaves no sites in cell c");
    return out;
}

Workspace build_workspace(Scenario sc) {
    sc.validate();
    Workspace ws;
    ws.sc = std::move(sc);
    const Scenario& s = ws.sc;
    ws.grid = PixelGrid(s.extent, s.pixel_size);
    const std::size_t P = ws.grid.size();

    // traffic field, normalized to a grid average of exactly 1
    ws.phi.resize(P, 1.0);
    if (s.profile.type == TrafficProfile::Type::Hotspot) {
        for (std::size_t p = 0; p < P; ++p) {
            const Point c = ws.grid.center(p);
            const double dx = c.x - s.profile.center.x;
            const double dy = c.y - s.profile.center.y;
            ws.phi[p] = 1.0 + s.profile.mass *
                        std::exp(-(dx * dx + dy * dy) / (2.0 * s.profile.sigma_m * s.profile.sigma_m));
        }
    }
    double mean = 0.0;
    for (double v : ws.phi) mean += v;
    mean /= static_cast<double>(P);
    for (double& v : ws.phi) v /= mean;

    ws.K0 = static_cast<int>(s.stations.size());
    for (int k = 0; k < ws.K0; ++k)
        if (s.stations[k].id == s.cell_of_interest) ws.enb_c = k;

    // candidate sites and their lattice adjacency
    ws.sites = enumerate_candidates(s);
    const Point anchor = s.stations[ws.enb_c].pos;
    std::map<std::pair<int, int>, int> lattice;
    auto coord = [&](const Point& q) {
        return std::make_pair(static_cast<int>(std::llround((q.x - anchor.x) / s.candidate_step)),
                              static_cast<int>(std::llround((q.y - anchor.y) / s.candidate_step)));
    };
    for (std::size_t i = 0; i < ws.sites.size(); ++i) lattice[coord(ws.sites[i])] = static_cast<int>(i);
    ws.site_neighbors.resize(ws.sites.size());
    for (std::size_t i = 0; i < ws.sites.size(); ++i) {
        const auto [cx, cy] = coord(ws.sites[i]);
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                auto it = lattice.find({cx + dx, cy + dy});
                ws.site_neighbors[i][n++] = (it == lattice.end()) ? -1 : it->second;
            }
    }

    // gain & pilot fields
    ws.gain_static.assign(ws.K0, std::vector<double>(P));
    ws.pilot_static.assign(ws.K0, std::vector<double>(P));
    for (int k = 0; k < ws.K0; ++k) {
        const Station& st = s.stations[k];
        const LinkClass lc = st.kind == StationKind::Enb ? LinkClass::UeToEnb : LinkClass::UeToRn;
        const double pilot_w = dbm_to_w(st.pilot_dbm);
        for (std::size_t p = 0; p < P; ++p) {
            const double g = gain(s.channel, lc, ws.grid.center(p), st.pos, p,
                                  static_cast<std::uint64_t>(st.id));
            ws.gain_static[k][p] = g;
            ws.pilot_static[k][p] = pilot_w * g;
        }
    }
    const std::size_t S = ws.sites.size();
    ws.gain_site.assign(S, std::vector<double>(P));
    ws.pilot_site.assign(S, std::vector<double>(P));
    const double rn_pilot_w = dbm_to_w(s.rn_pilot_dbm);
    for (std::size_t q = 0; q < S; ++q) {
        for (std::size_t p = 0; p < P; ++p) {
            const double g = gain(s.channel, LinkClass::UeToRn, ws.grid.center(p), ws.sites[q], p,
                                  kSiteKeyBase + q);
            ws.gain_site[q][p] = g;
            ws.pilot_site[q][p] = rn_pilot_w * g;
        }
    }

    // backhaul gains towards every static eNB
    ws.bh_gain_static.assign(ws.K0, std::vector<double>(ws.K0, 0.0));
    ws.bh_gain_site.assign(S, std::vector<double>(ws.K0, 0.0));
    for (int j = 0; j < ws.K0; ++j) {
        if (s.stations[j].kind != StationKind::Enb) continue;
        for (int r = 0; r < ws.K0; ++r) {
            if (s.stations[r].kind != StationKind::Rn) continue;
            ws.bh_gain_static[r][j] =
                gain(s.channel, LinkClass::RnToEnb, s.stations[r].pos, s.stations[j].pos,
                     ws.grid.index_of(s.stations[r].pos), static_cast<std::uint64_t>(s.stations[j].id));
        }
        for (std::size_t q = 0; q < S; ++q) {
            ws.bh_gain_site[q][j] =
                gain(s.channel, LinkClass::RnToEnb, ws.sites[q], s.stations[j].pos,
                     ws.grid.index_of(ws.sites[q]), static_cast<std::uint64_t>(s.stations[j].id));
        }
    }

    // unbiased eNB-only region of cell c (used for reporting and tests)
    ws.cellc_mask.assign(P, 0);
    for (std::size_t p = 0; p < P; ++p) {
        double best = -1.0;
        int best_k = -1;
        for (int k = 0; k < ws.K0; ++k) {
            if (s.stations[k].kind != StationKind::Enb) continue;
            if (ws.pilot_static[k][p] > best) { best = ws.pilot_static[k][p]; best_k = k; }
        }
        ws.cellc_mask[p] = (best_k == ws.enb_c) ? 1 : 0;
    }

    return ws;
}

void validate_configuration(const Workspace& ws, const Configuration& x) {
    std::set<int> seen;
    for (int sidx : x.rn_sites) {
        if (sidx < 0 || sidx >= static_cast<int>(ws.sites.size()))
            throw std::runtime_error("configuration: rn site index out of range");
        if (!seen.insert(sidx).second)
            throw std::runtime_error("configuration: two RNs on one candidate site");
    }
    if (x.p_enb_idx < 0 || x.p_enb_idx >= ws.sc.target_dbm.count() ||
        x.p_rn_idx < 0 || x.p_rn_idx >= ws.sc.target_dbm.count())
        throw std::runtime_error("configuration: target power index out of range");
    if (x.bias_idx < 0 || x.bias_idx >= ws.sc.bias_db.count())
        throw std::runtime_error("configuration: bias index out of range");
}

std::vector<ActiveStation> active_stations(const Workspace& ws, const Configuration& x) {
    validate_configuration(ws, x);
    std::vector<ActiveStation> act;
    act.reserve(ws.K0 + x.rn_sites.size());
    for (int k = 0; k < ws.K0; ++k) {
        const Station& st = ws.sc.stations[k];
        ActiveStation a;
        a.id = st.id;
        a.kind = st.kind;
        a.pos = st.pos;
        a.cell = st.cell;
        a.static_index = k;
        a.pilot_w = dbm_to_w(st.pilot_dbm);
        a.backhaul_w = dbm_to_w(st.backhaul_dbm);
        act.push_back(a);
    }
    // resolve donor indices for static RNs
    for (auto& a : act) {
        if (a.kind != StationKind::Rn) continue;
        const int donor_id = ws.sc.stations[a.static_index].donor;
        for (std::size_t i = 0; i < act.size(); ++i)
            if (act[i].id == donor_id) a.donor_index = static_cast<int>(i);
    }
    int next_id = ws.sc.stations.back().id + 1;
    for (int sidx : x.rn_sites) {
        ActiveStation a;
        a.id = next_id++;
        a.kind = StationKind::Rn;
        a.pos = ws.sites[sidx];
        a.cell = ws.sc.stations[ws.enb_c].cell;
        a.donor_index = ws.enb_c;
        a.site = sidx;
        a.pilot_w = dbm_to_w(ws.sc.rn_pilot_dbm);
        a.backhaul_w = dbm_to_w(ws.sc.rn_backhaul_dbm);
        act.push_back(a);
    }
    return act;
}

AssociationMap build_association(const Workspace& ws, const Configuration& x) {
    return build_association(ws, x, active_stations(ws, x));
}

AssociationMap build_association(const Workspace& ws, const Configuration& x,
                                 const std::vector<ActiveStation>& act) {
    const std::size_t P = ws.grid.size();
    const double bias_lin = db_to_lin(ws.sc.bias_db.value(x.bias_idx));
    AssociationMap am;
    am.server.assign(P, -1);
    am.area.assign(act.size(), 0.0);
    am.phi_mass.assign(act.size(), 0.0);
    const double da = ws.grid.pixel_area();
    for (std::size_t p = 0; p < P; ++p) {
        double best = -1.0;
        int best_k = -1;
        for (std::size_t k = 0; k < act.size(); ++k) {
            double m = ws.pilot_of(static_cast<int>(k), act, p);
            if (act[k].kind == StationKind::Rn) m *= bias_lin;
            if (m > best) { best = m; best_k = static_cast<int>(k); }
        }
        am.server[p] = best_k;
        am.area[best_k] += da;
        am.phi_mass[best_k] += ws.phi[p] * da;
    }
    return am;
}

}  // namespace relaysim
