#pragma once

#include <cmath>
#include <limits>

// Small log-space helpers shared by the rate modules (internal, not part of
// the public headers).
namespace keyrate {
namespace detail {

// ln C(n, k) via lgamma; exact enough for masses at any supported size.
inline double lchoose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double log2choose(int n, int k) { return lchoose(n, k) / std::log(2.0); }

// k * log(v) with the convention 0 * log(0) = 0.
inline double wlog(double k, double v) { return k == 0.0 ? 0.0 : k * std::log(v); }
inline double wlog2(double k, double v) { return k == 0.0 ? 0.0 : k * std::log2(v); }

// log2(2^a + 2^b), tolerant of -inf arguments.
inline double logadd2(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log2(1.0 + std::exp2(b - a));
}

}  // namespace detail
}  // namespace keyrate
