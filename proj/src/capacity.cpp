#include "relaysim/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "relaysim/rng.hpp"

namespace relaysim {

CapacityTable::CapacityTable(std::vector<double> thresholds_db, std::vector<double> rates_bps,
                             double floor_bps)
    : thr_db_(std::move(thresholds_db)), rates_(std::move(rates_bps)), floor_(floor_bps) {
    if (thr_db_.empty() || thr_db_.size() != rates_.size())
        throw std::invalid_argument("capacity table: thresholds/rates size mismatch");
    if (floor_ <= 0.0)
        throw std::invalid_argument("capacity table: rate floor must be > 0");
    for (std::size_t i = 1; i < thr_db_.size(); ++i) {
        if (thr_db_[i] <= thr_db_[i - 1])
            throw std::invalid_argument("capacity table: thresholds must be strictly increasing");
        if (rates_[i] < rates_[i - 1])
            throw std::invalid_argument("capacity table: rates must be non-decreasing");
    }
    if (rates_.front() < floor_)
        throw std::invalid_argument("capacity table: first rate below the floor");
    thr_lin_.reserve(thr_db_.size());
    for (double t : thr_db_) thr_lin_.push_back(db_to_lin(t));
}

CapacityTable CapacityTable::default_table(int rb_count, double floor_bps) {
    // CQI-ladder spectral efficiencies, bit/s/Hz, capped at 4.8
    static const double kEff[15] = {0.1523, 0.2344, 0.3770, 0.6016, 0.8770,
                                    1.1758, 1.4766, 1.9141, 2.4063, 2.7305,
                                    3.3223, 3.9023, 4.5234, 4.8000, 4.8000};
    std::vector<double> thr, rate;
    for (int i = 0; i < 15; ++i) {
        thr.push_back(-6.5 + 2.0 * i);
        rate.push_back(kEff[i] * 180e3 * rb_count);
    }
    return CapacityTable(std::move(thr), std::move(rate), floor_bps);
}

CapacityTable CapacityTable::from_csv(const std::string& path, int rb_count, double floor_bps) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("capacity table: cannot open " + path);
    std::string line;
    std::vector<double> thr, rate;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (first) {  // header row
            first = false;
            if (line.find("sinr_db") != std::string::npos) continue;
        }
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b))
            throw std::runtime_error("capacity table: bad CSV row: " + line);
        thr.push_back(std::stod(a));
        rate.push_back(std::stod(b) * rb_count);
    }
    return CapacityTable(std::move(thr), std::move(rate), floor_bps);
}

double CapacityTable::rate_at_db(double sinr_db) const {
    auto it = std::upper_bound(thr_db_.begin(), thr_db_.end(), sinr_db);
    if (it == thr_db_.begin()) return floor_;
    return rates_[static_cast<std::size_t>(it - thr_db_.begin()) - 1];
}

double CapacityTable::rate_at_linear(double sinr_linear) const {
    auto it = std::upper_bound(thr_lin_.begin(), thr_lin_.end(), sinr_linear);
    if (it == thr_lin_.begin()) return floor_;
    return rates_[static_cast<std::size_t>(it - thr_lin_.begin()) - 1];
}

}  // namespace relaysim
