#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sagopt/dataset.hpp"
#include "sagopt/metrics.hpp"
#include "sagopt/models/params.hpp"

namespace sagopt {

struct CrossValidation {
    std::string label;
    RegressorSpec spec;
    std::vector<MetricReport> folds;
    FoldSummary summary;
    std::vector<std::string> warnings;
};

// Fits on every train split and scores the held-out fold. Folds run in
// parallel; results are stored by fold index, so they never depend on the
// thread count.
[[nodiscard]] CrossValidation cross_validate(const RegressorSpec& spec, const Dataset& data,
                                             const FoldAssignment& folds, const MetricOptions& options = {});

// Runs every spec on the same fold assignment.
[[nodiscard]] std::vector<CrossValidation> compare_models(const std::vector<std::pair<std::string, RegressorSpec>>& specs,
                                                          const Dataset& data, const FoldAssignment& folds,
                                                          const MetricOptions& options = {});

// R² on a held-out set, falling back to -inf when undefined (constant target).
[[nodiscard]] double holdout_r2(std::span<const double> pred, std::span<const double> actual);

} // namespace sagopt
