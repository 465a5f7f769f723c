#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace loadid {

/// Mean with extended-precision accumulation so long records keep ~1e-15
/// relative accuracy.
inline double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    long double acc = 0.0L;
    for (double v : x) acc += v;
    return static_cast<double>(acc / static_cast<long double>(x.size()));
}

inline double rms(std::span<const double> x) {
    if (x.empty()) return 0.0;
    long double acc = 0.0L;
    for (double v : x) acc += static_cast<long double>(v) * v;
    return std::sqrt(static_cast<double>(acc / static_cast<long double>(x.size())));
}

/// Median of a copy of the data; averages the two middle elements for even
/// counts.
inline double median(std::vector<double> x) {
    if (x.empty()) return 0.0;
    const std::size_t n = x.size();
    const std::size_t mid = n / 2;
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid), x.end());
    double hi = x[mid];
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

/// Sample standard deviation (n-1 normalization); 0 for fewer than two points.
inline double sample_stddev(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    long double acc = 0.0L;
    for (double v : x) {
        const long double d = static_cast<long double>(v) - m;
        acc += d * d;
    }
    return std::sqrt(static_cast<double>(acc / static_cast<long double>(x.size() - 1)));
}

} // namespace loadid
