#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sagopt/matrix.hpp"
#include "sagopt/random.hpp"

namespace sagopt {

// Internal nodes route x[feature] <= threshold to the left child.
struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    std::size_t samples = 0;

    [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

class Tree {
public:
    Tree() = default;
    explicit Tree(std::vector<TreeNode> nodes);

    [[nodiscard]] double predict(std::span<const double> x) const { return nodes_[leaf_index(x)].value; }
    [[nodiscard]] std::size_t leaf_index(std::span<const double> x) const;

    [[nodiscard]] const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t depth() const;
    [[nodiscard]] std::size_t leaf_count() const;
    void set_value(std::size_t node, double value) { nodes_[node].value = value; }

    bool operator==(const Tree&) const = default;

private:
    std::vector<TreeNode> nodes_{TreeNode{}};
};

// Settings shared by every tree grower. With unit hessians and zero penalties
// the second-order criterion reduces to variance reduction, so one grower
// serves CART, the forests and all boosting variants.
struct TreeParams {
    std::size_t max_depth = 6;
    std::size_t min_samples_leaf = 1;
    double l2 = 0.0;    // leaf-weight L2 penalty
    double l1 = 0.0;    // leaf-weight L1 penalty
    double gamma = 0.0; // per-split cost
    std::size_t max_features = 0; // 0 = all
    bool random_thresholds = false;
    double ccp_alpha = 0.0;
};

// Column-major copy of X with each column's row order by (value, row).
// Computed once per fit and shared by every tree grown on that X.
class PresortedColumns {
public:
    explicit PresortedColumns(const Matrix& x);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return values_.size(); }
    [[nodiscard]] double value(std::size_t feature, std::size_t row) const { return values_[feature][row]; }
    [[nodiscard]] const std::vector<std::uint32_t>& order(std::size_t feature) const { return order_[feature]; }

private:
    std::size_t rows_ = 0;
    std::vector<std::vector<double>> values_;
    std::vector<std::vector<std::uint32_t>> order_;
};

struct TreeFit {
    Tree tree;
    std::vector<std::uint32_t> leaf_of_slot; // node id of the leaf each slot ends in
};

// Grows one tree. `slots` lists the training rows (repeats allowed, as in a
// bootstrap sample); grad/hess are per slot. Leaf value is
// -soft(G, l1/2) / (H + l2); a split is kept only when its gain exceeds gamma.
// `rng` is only consulted for feature subsampling and random thresholds.
[[nodiscard]] TreeFit grow_tree(const PresortedColumns& x, std::span<const std::uint32_t> slots,
                                std::span<const double> grad, std::span<const double> hess,
                                const TreeParams& params, Rng* rng = nullptr);

// Plain regression tree on targets y over all rows (grad = -y, hess = 1).
[[nodiscard]] Tree grow_regression_tree(const PresortedColumns& x, std::span<const double> y, const TreeParams& params,
                                        Rng* rng = nullptr);

// Equal-frequency binning computed once per fit. When a column has at most
// n_bins distinct values every value gets its own bin (lossless).
class BinnedColumns {
public:
    BinnedColumns(const Matrix& x, std::size_t n_bins);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return bins_.size(); }
    [[nodiscard]] std::size_t bin_count(std::size_t feature) const { return cuts_[feature].size() + 1; }
    [[nodiscard]] std::uint32_t bin(std::size_t feature, std::size_t row) const { return bins_[feature][row]; }
    [[nodiscard]] double value(std::size_t feature, std::size_t row) const { return values_[feature][row]; }
    [[nodiscard]] std::size_t bin_of(std::size_t feature, double v) const;

private:
    std::size_t rows_ = 0;
    std::vector<std::vector<double>> cuts_;
    std::vector<std::vector<std::uint32_t>> bins_;
    std::vector<std::vector<double>> values_;
};

// Histogram grower: candidate splits are bin boundaries only. The threshold
// sits midway between the largest value in the last left bin and the
// smallest value in the first right bin, both taken within the node.
[[nodiscard]] TreeFit grow_histogram_tree(const BinnedColumns& x, std::span<const double> grad,
                                          std::span<const double> hess, const TreeParams& params);

} // namespace sagopt
