#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sagopt/matrix.hpp"
#include "sagopt/models/regressor.hpp"
#include "sagopt/models/tree.hpp"

namespace sagopt {

enum class Combine {
    additive,       // base + sum_i weight_i * tree_i(x)
    average,        // mean of tree outputs
    weighted_median // lower weighted median of tree outputs
};

// Every tree-based model: a single CART is an average of one tree.
class TreeEnsemble : public Regressor {
public:
    TreeEnsemble(Combine combine, double base, std::vector<Tree> trees, std::vector<double> weights);

    [[nodiscard]] Combine combine() const noexcept { return combine_; }
    [[nodiscard]] double base() const noexcept { return base_; }
    [[nodiscard]] const std::vector<Tree>& trees() const noexcept { return trees_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }

    [[nodiscard]] double predict_row(std::span<const double> x) const override;
    [[nodiscard]] std::vector<double> member_predictions(std::span<const double> x) const;

    [[nodiscard]] Json to_json() const override;
    [[nodiscard]] std::string summary() const override;

private:
    Combine combine_;
    double base_;
    std::vector<Tree> trees_;
    std::vector<double> weights_;
};

[[nodiscard]] double weighted_median(std::span<const double> values, std::span<const double> weights);

struct ForestOptions {
    std::size_t n_trees = 100;
    bool bootstrap = true;
    TreeParams tree; // max_features and random_thresholds select RF vs extra trees
    std::uint64_t seed = 0;
};

// Trees are independent given (seed, tree index), so they are grown in parallel.
[[nodiscard]] std::shared_ptr<const TreeEnsemble> fit_forest(const Matrix& x, std::span<const double> y,
                                                            const ForestOptions& options);

struct AdaBoostOptions {
    std::size_t n_estimators = 50;
    TreeParams tree;
    std::uint64_t seed = 0;
};

struct AdaBoostTrace {
    std::vector<std::vector<double>> sample_weights; // [0] uniform, [r+1] after round r
    std::vector<double> average_loss;
    std::vector<double> learner_weight;
    bool degenerate_first = false; // first learner already had average loss >= 0.5
    bool perfect_stop = false;     // a round fit every sample exactly
};

// AdaBoost.R2 with linear loss. `warnings` receives the degenerate-first note.
[[nodiscard]] std::shared_ptr<const TreeEnsemble> fit_adaboost_r2(const Matrix& x, std::span<const double> y,
                                                                 const AdaBoostOptions& options,
                                                                 AdaBoostTrace* trace = nullptr,
                                                                 std::vector<std::string>* warnings = nullptr);

} // namespace sagopt
