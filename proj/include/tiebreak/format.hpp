#pragma once

#include <cstdio>
#include <string>

namespace tiebreak {

// 17 significant digits: enough to round-trip any finite double exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace tiebreak
