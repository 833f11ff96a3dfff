#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sagopt/matrix.hpp"

namespace sagopt {

struct FriedmanResult {
    std::vector<double> average_rank; // one per model (column)
    double statistic = 0.0;           // chi-square form, no Iman-Davenport correction
    double p_value = 1.0;             // chi-square with m-1 degrees of freedom
};

// scores is runs x models. Within each run, rank 1 is the best model under
// the flag; tied models share the average of their ranks.
[[nodiscard]] FriedmanResult friedman_average_ranks(const Matrix& scores, bool higher_is_better);

// Ranks within one run (1 = best), tie-averaged.
[[nodiscard]] std::vector<double> rank_row(std::span<const double> row, bool higher_is_better);

// Two-sided p-value of the paired-difference t statistic. Throws
// DegenerateError when every difference is exactly zero. When the
// differences are constant but nonzero, t is infinite and p = 0.
[[nodiscard]] double paired_t_test(std::span<const double> a, std::span<const double> b);

struct RankReport {
    std::vector<std::string> models;
    std::vector<double> average_rank;
    double friedman_statistic = 0.0;
    double friedman_p_value = 1.0;
    std::size_t best = 0; // argmin average rank, lowest index on ties
    // p-value of the paired t-test of each model against the best one. Empty
    // for the best model itself and for pairs with identical scores.
    std::vector<std::optional<double>> pairwise_p;

    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] std::string to_csv() const;
};

[[nodiscard]] RankReport rank_models(const std::vector<std::string>& models, const Matrix& scores, bool higher_is_better);

} // namespace sagopt
