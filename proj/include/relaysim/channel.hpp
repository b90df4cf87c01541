// channel.hpp - large-scale channel: log-distance path loss plus one frozen
// seeded lognormal shadowing realization, and the FCPC uplink power rule.

#pragma once

#include <cstdint>
#include <vector>

#include "relaysim/geometry.hpp"
#include "relaysim/rng.hpp"

namespace relaysim {

enum class LinkClass { UeToEnb, UeToRn, RnToEnb };

struct PathLossParams {
    double intercept_db = 128.1;  // loss at 1 km
    double exponent = 3.76;       // 10*exponent dB per decade
    double shadow_std_db = 6.0;
};

struct ChannelModel {
    PathLossParams ue_enb;
    PathLossParams ue_rn;
    PathLossParams rn_enb;
    std::uint64_t rng_seed = 1;

    const PathLossParams& params(LinkClass lc) const {
        switch (lc) {
            case LinkClass::UeToEnb: return ue_enb;
            case LinkClass::UeToRn: return ue_rn;
            default: return rn_enb;
        }
    }
};

// Deterministic shadowing in dB for a (source pixel, destination station) pair.
// The realization is a pure function of (seed, pixel, station key, link class),
// so relocating a candidate RN resamples its field while repeated queries agree.
inline double shadow_db(const ChannelModel& model, LinkClass lc, std::uint64_t src_pixel,
                        std::uint64_t dst_key) {
    const PathLossParams& p = model.params(lc);
    if (p.shadow_std_db <= 0.0) return 0.0;
    std::uint64_t h = hash_combine(model.rng_seed, static_cast<std::uint64_t>(lc) + 1);
    h = hash_combine(h, src_pixel + 1);
    h = hash_combine(h, dst_key + 1);
    // map to an open-(0,1) uniform, then through the normal quantile
    const double u = (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
    return p.shadow_std_db * normal_quantile(u);
}

// Linear channel gain (path loss x shadowing), clamped into (0, 1].
// Distances are clamped below at 1 m.
inline double gain(const ChannelModel& model, LinkClass lc, const Point& src, const Point& dst,
                   std::uint64_t src_pixel, std::uint64_t dst_key) {
    const PathLossParams& p = model.params(lc);
    const double d_km = std::max(distance(src, dst), 1.0) / 1000.0;
    const double pl_db = p.intercept_db + 10.0 * p.exponent * std::log10(d_km);
    const double g_db = -pl_db + shadow_db(model, lc, src_pixel, dst_key);
    return std::min(1.0, db_to_lin(g_db));
}

// Per-pixel FCPC uplink transmit power T(s) = min(Tmax, Pbar / G_serving(s)).
struct TxPowerField {
    std::vector<double> power_w;      // per pixel
    std::vector<std::uint8_t> clamped;
};

struct Workspace;
struct Configuration;
struct AssociationMap;

TxPowerField fcpc_power(const Workspace& ws, const Configuration& x, const AssociationMap& assoc);

}  // namespace relaysim
