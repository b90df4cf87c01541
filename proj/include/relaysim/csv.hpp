// csv.hpp - tiny CSV/report writing helpers; all floats go out with
// 9 significant digits.

#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace relaysim {

inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// whole-file write through a temp name so readers never see partial output
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move " + tmp + " into place");
}

}  // namespace relaysim
