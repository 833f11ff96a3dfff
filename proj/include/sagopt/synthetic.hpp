#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sagopt/dataset.hpp"

namespace sagopt {

// The 20-input SAG mill schema with the recorded operating ranges, plus
// the throughput target (t/h).
[[nodiscard]] Schema mill_schema();

// Deterministic synthetic stand-in for plant records.
//
// Ground truth (version 1). With u_j = (x_j - lower_j) / (upper_j - lower_j),
// sat(u, k) = (1 - e^{-k u}) / (1 - e^{-k}) and bump(u, c, w) = exp(-((u - c) / w)^2):
//
//   f = 700
//     + 160 bump(u_power, .55, .25) bump(u_weight, .50, .30)
//     + 100 bump(u_weight, .50, .22)
//     +  85 sat(u_speed, 4) bump(u_water, .50, .25)
//     +  70 bump(u_feeder1, .45, .25)
//     +  75 bump(u_feeder2, .55, .25) bump(u_feeder3, .50, .30)
//     +  45 u_crusher1 bump(u_pl13.2, .40, .35)
//     +  55 bump(u_pl13.2, .40, .30)
//     +  45 bump(u_pl19-26.5, .50, .25)
//     +  55 bump(u_pl26.5-37.5, .45, .30) bump(u_pl37.5-53, .50, .35)
//     +  40 bump(u_pl37.5-53, .50, .25)
//     +  65 sat(u_pl75-106, 3) bump(u_pl106-150, .40, .35)
//     +  75 bump(u_p80, .60, .25)
//
// Every factor is non-negative and all factors sharing a coordinate peak at
// the same point, so the supremum is 700 + 870 = 1570, attained at the peak
// coordinates. The five inert features (%PL 13.2-19mm, %PL 53-75mm,
// %PL 150-212mm, %PL 212-300mm, pebble crusher 2 status) never enter f and
// are drawn with low variance around their typical plant values. The
// fifteen signal features are drawn uniformly over their ranges, with
// pebble crusher 1 status drawn from {0, 1, 2}.
class MillGroundTruth {
public:
    static constexpr int version = 1;
    static constexpr double base_level = 700.0;
    static constexpr double supremum = 1570.0;

    MillGroundTruth();

    // Noise-free throughput for a full 20-feature row in mill_schema() order.
    [[nodiscard]] double operator()(std::span<const double> row) const;

    // A maximizing row (inert features at their typical values).
    [[nodiscard]] std::vector<double> maximizer() const;
    [[nodiscard]] double max_value() const noexcept { return supremum; }

    [[nodiscard]] static std::vector<std::string> signal_features();
    [[nodiscard]] static std::vector<std::string> inert_features();

private:
    Schema schema_;
};

// n rows within the schema bounds; target = ground truth + N(0, noise_std).
[[nodiscard]] Dataset generate_synthetic_mill(std::size_t n, std::uint64_t seed, double noise_std);

} // namespace sagopt
