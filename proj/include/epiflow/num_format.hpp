#pragma once

#include <charconv>
#include <string>

namespace epiflow {

// Shortest decimal form that round-trips to the same double. Locale-free.
inline std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

} // namespace epiflow
