#include "sagopt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sagopt/error.hpp"

namespace sagopt {

double quantile(std::span<const double> values, double q)
{
    if (values.empty()) {
        throw InvalidArgument("quantile of an empty sample");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw InvalidArgument("quantile level must lie in [0, 1]");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean(std::span<const double> values)
{
    if (values.empty()) {
        throw InvalidArgument("mean of an empty sample");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

} // namespace sagopt
