#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "sagopt/matrix.hpp"
#include "sagopt/models/ensemble.hpp"
#include "sagopt/models/tree.hpp"

namespace sagopt {

struct BoostOptions {
    std::size_t n_stages = 100;
    double learning_rate = 0.1;
    TreeParams tree;
};

struct BoostTrace {
    std::vector<double> stage1_residuals;
    std::vector<double> train_mse;   // [0] constant model, [m] after stage m
    std::vector<double> multipliers; // line-search multiplier per stage (1 for second-order boosting)
};

// Squared-loss gradient boosting: F0 = mean(y), each stage fits a regression
// tree h to r = y - F, rho = sum(r h) / sum(h^2), F += rate * rho * h.
[[nodiscard]] std::shared_ptr<const TreeEnsemble> fit_gbm(const Matrix& x, std::span<const double> y,
                                                         const BoostOptions& options, BoostTrace* trace = nullptr);

// Second-order boosting with g = F - y, h = 1, penalized leaves (options.tree
// l1/l2/gamma), and F += rate * tree.
[[nodiscard]] std::shared_ptr<const TreeEnsemble> fit_regularized_gbm(const Matrix& x, std::span<const double> y,
                                                                     const BoostOptions& options,
                                                                     BoostTrace* trace = nullptr);

// fit_gbm staging with splits restricted to equal-frequency bin boundaries.
[[nodiscard]] std::shared_ptr<const TreeEnsemble> fit_hgbm(const Matrix& x, std::span<const double> y,
                                                          const BoostOptions& options, std::size_t n_bins,
                                                          BoostTrace* trace = nullptr);

struct OrderedOptions {
    BoostOptions boost;
    std::size_t n_permutations = 4;
    double prior = 0.0; // prefix prediction for the first sample of a permutation
    std::uint64_t seed = 0;
};

// One permutation's run. prefix_predictions[t][j] is the prediction used to
// form the stage-t residual of the sample at position j; it depends only on
// samples at earlier positions (and on the stage tree structures).
struct OrderedChain {
    std::vector<std::size_t> permutation;
    std::vector<std::vector<double>> prefix_predictions;
    std::vector<Tree> trees; // structure fit to ordered residuals, leaves set for inference
    double base = 0.0;
};

[[nodiscard]] OrderedChain run_ordered_chain(const Matrix& x, std::span<const double> y,
                                             std::span<const std::size_t> permutation, const OrderedOptions& options);

// Averages run_ordered_chain over seeded permutations.
[[nodiscard]] std::shared_ptr<const TreeEnsemble> fit_ordered_gbm(const Matrix& x, std::span<const double> y,
                                                                 const OrderedOptions& options);

} // namespace sagopt
