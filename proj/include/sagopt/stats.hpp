#pragma once

#include <span>

namespace sagopt {

// Linear-interpolation quantile (the common "type 7" rule) of an unsorted
// sample; q in [0, 1]. Throws InvalidArgument on an empty sample.
[[nodiscard]] double quantile(std::span<const double> values, double q);

[[nodiscard]] inline double median(std::span<const double> values) { return quantile(values, 0.5); }

[[nodiscard]] double mean(std::span<const double> values);

} // namespace sagopt
