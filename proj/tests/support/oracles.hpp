#pragma once

// Independent straight-line reference implementations used to check the
// library. They favour obviousness over speed and share no code with it.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sagopt/matrix.hpp"

namespace oracles {

struct Metrics {
    double mse = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    std::optional<double> mape;
    double smape = 0.0;
    std::optional<double> pearson_r;
    std::optional<double> r2;
    std::optional<double> evs;
    std::optional<double> msle;
};

// Textbook formulas, one pass per quantity, long double accumulators.
// MAPE and SMAPE are percentages; SMAPE uses |pred| + |actual| in the
// denominator and skips 0/0 terms.
[[nodiscard]] Metrics metrics(std::span<const double> pred, std::span<const double> actual);

// O(n^2) local outlier factor on z-scored columns (population std, constant
// columns left unscaled), with every point tied at the k-distance included.
[[nodiscard]] std::vector<double> lof(const sagopt::Matrix& x, std::size_t k);

// Ranks 1..m per row by counting better and tied entries, column means.
[[nodiscard]] std::vector<double> average_ranks(const sagopt::Matrix& scores, bool higher_is_better);

// Solves (A^T A + ridge I) w = A^T b by Gauss-Jordan elimination with
// partial pivoting.
[[nodiscard]] std::vector<double> ridge_solve(const sagopt::Matrix& a, std::span<const double> b, double ridge);

// Ordered-boosting prefix prediction for position j at every stage,
// recomputed from the targets of positions 0..j-1 only. `leaf[t][i]` is the
// stage-t leaf of the sample at position i. Targets at positions >= j are
// never read.
[[nodiscard]] std::vector<double> ordered_prefix(std::span<const double> y_by_position,
                                                 const std::vector<std::vector<std::size_t>>& leaf, std::size_t j,
                                                 double rate, double prior);

} // namespace oracles
