#pragma once

#include <charconv>
#include <string>

namespace dlgn::detail {

// Shortest decimal form that round-trips exactly through stod.
inline std::string shortest(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

}  // namespace dlgn::detail
