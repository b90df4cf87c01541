// capacity.hpp - SINR -> physical data rate mapping (MCS step table).
//
// The table maps the SINR of a scheduled user to the rate it would achieve
// alone in its serving area (full bandwidth). Below the lowest MCS threshold
// the rate falls to a small positive floor so that 1/C stays integrable.

#pragma once

#include <string>
#include <vector>

namespace relaysim {

class CapacityTable {
public:
    // thresholds_db must be strictly increasing, rates_bps non-decreasing.
    CapacityTable(std::vector<double> thresholds_db, std::vector<double> rates_bps,
                  double floor_bps);

    // 15-level table, 2 dB spacing from -6.5 dB, spectral efficiency capped
    // at 4.8 bit/s/Hz; per-RB rates scaled by rb_count * 180 kHz.
    static CapacityTable default_table(int rb_count, double floor_bps);

    // CSV with header "sinr_db,rate_bits_per_rb"; per-RB rates scaled by rb_count.
    static CapacityTable from_csv(const std::string& path, int rb_count, double floor_bps);

    double rate_at_linear(double sinr_linear) const;
    double rate_at_db(double sinr_db) const;

    double floor_bps() const { return floor_; }
    double max_rate_bps() const { return rates_.back(); }
    std::size_t levels() const { return rates_.size(); }

    // Step breakpoints in linear SINR, ascending; used for exact piecewise
    // integration of 1/C against a SINR density.
    const std::vector<double>& thresholds_linear() const { return thr_lin_; }
    // rate on [thr_lin[i], thr_lin[i+1]); index levels() applies above the top.
    double level_rate(std::size_t i) const { return i == 0 ? floor_ : rates_[i - 1]; }

private:
    std::vector<double> thr_db_;
    std::vector<double> thr_lin_;
    std::vector<double> rates_;
    double floor_ = 0.0;
};

}  // namespace relaysim
