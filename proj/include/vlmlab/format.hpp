// Deterministic numeric formatting for exported artifacts: 12 significant
// digits everywhere, so identical runs produce byte-identical files.

#ifndef VLMLAB_FORMAT_HPP
#define VLMLAB_FORMAT_HPP

#include <cstdio>
#include <string>

namespace vlmlab {

inline std::string format_sig12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

/// Quantize to 12 significant digits (the value a "%.12g" round trip gives).
inline double quant12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return std::strtod(buf, nullptr);
}

} // namespace vlmlab

#endif // VLMLAB_FORMAT_HPP
