#include "relaysim/channel.hpp"

#include "relaysim/scenario.hpp"

namespace relaysim {

TxPowerField fcpc_power(const Workspace& ws, const Configuration& x, const AssociationMap& assoc) {
    const auto act = active_stations(ws, x);
    const std::size_t P = ws.grid.size();
    const double p_enb_w = dbm_to_w(ws.sc.target_dbm.value(x.p_enb_idx));
    const double p_rn_w = dbm_to_w(ws.sc.target_dbm.value(x.p_rn_idx));

    TxPowerField tx;
    tx.power_w.resize(P);
    tx.clamped.assign(P, 0);
    for (std::size_t p = 0; p < P; ++p) {
        const int k = assoc.server[p];
        const double target = act[k].kind == StationKind::Enb ? p_enb_w : p_rn_w;
        const double g = ws.gain_of(k, act, p);
        const double required = target / g;
        if (required >= ws.sc.tmax_w) {
            tx.power_w[p] = ws.sc.tmax_w;
            tx.clamped[p] = 1;
        } else {
            tx.power_w[p] = required;
        }
    }
    return tx;
}

}  // namespace relaysim
