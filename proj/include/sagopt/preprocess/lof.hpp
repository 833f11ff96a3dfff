#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sagopt/dataset.hpp"
#include "sagopt/matrix.hpp"

namespace sagopt {

struct LofResult {
    std::vector<double> scores;
    std::size_t k = 0;
    double threshold = 0.0; // scores above this are flagged

    [[nodiscard]] std::size_t flagged() const;
    // row,score,flagged
    [[nodiscard]] std::string to_csv() const;
};

// Neighbour distances below this floor count as zero density spread.
inline constexpr double lof_density_floor = 1e-12;

// Local outlier factor on z-score standardized features with Euclidean
// distance. The k-neighbourhood includes every point tied with the k-th
// distance. The threshold defaults to the quantile that flags the top
// `flag_fraction` of scores. Throws InvalidArgument unless 1 <= k < n.
[[nodiscard]] LofResult lof_scores(const Matrix& x, std::size_t k, double flag_fraction = 0.01);
[[nodiscard]] inline LofResult lof_scores(const Dataset& data, std::size_t k, double flag_fraction = 0.01)
{
    return lof_scores(data.features(), k, flag_fraction);
}

// Drops rows whose score exceeds the threshold, keeping the order of the
// rest. Throws EmptyResultError when nothing survives.
[[nodiscard]] Dataset remove_outliers(const Dataset& data, const LofResult& result, double threshold);

} // namespace sagopt
