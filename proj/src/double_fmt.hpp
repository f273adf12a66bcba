#pragma once

#include <charconv>
#include <string>

namespace pahc {

// Shortest decimal form that round-trips the exact double. Keeps CSV output
// byte-stable while still distinguishing nextafter-separated thresholds.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace pahc
