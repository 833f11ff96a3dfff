#include "sagopt/models/boosting.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "sagopt/error.hpp"
#include "sagopt/parallel.hpp"
#include "sagopt/random.hpp"

namespace sagopt {

namespace {

void check_inputs(const Matrix& x, std::span<const double> y, const BoostOptions& options)
{
    if (x.rows() != y.size()) {
        throw DimensionError("feature rows and target length differ");
    }
    if (x.rows() == 0) {
        throw InvalidArgument("cannot fit on zero rows");
    }
    if (!(options.learning_rate > 0.0 && options.learning_rate <= 1.0)) {
        throw InvalidArgument("learning rate must lie in (0, 1]");
    }
}

double mean_of(std::span<const double> v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double mse_of(std::span<const double> y, const std::vector<double>& f)
{
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        s += (y[i] - f[i]) * (y[i] - f[i]);
    }
    return s / static_cast<double>(y.size());
}

std::vector<std::uint32_t> all_rows(std::size_t n)
{
    std::vector<std::uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0U);
    return rows;
}

TreeParams unpenalized(TreeParams p)
{
    p.l1 = p.l2 = p.gamma = 0.0;
    p.max_features = 0;
    p.random_thresholds = false;
    return p;
}

// Shared first-order loop; `grow` fits a tree to -grad with unit hessians.
template <class Grow>
std::shared_ptr<const TreeEnsemble> first_order_boost(std::span<const double> y, const BoostOptions& options,
                                                      BoostTrace* trace, Grow&& grow)
{
    const std::size_t n = y.size();
    const double f0 = mean_of(y);
    std::vector<double> f(n, f0);
    std::vector<double> r(n);
    std::vector<double> grad(n);
    const std::vector<double> hess(n, 1.0);
    std::vector<Tree> trees;
    std::vector<double> weights;
    if (trace != nullptr) {
        *trace = {};
        trace->train_mse.push_back(mse_of(y, f));
    }
    for (std::size_t m = 0; m < options.n_stages; ++m) {
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = y[i] - f[i];
            grad[i] = -r[i];
        }
        if (m == 0 && trace != nullptr) {
            trace->stage1_residuals = r;
        }
        TreeFit fit = grow(grad, hess);
        const auto& nodes = fit.tree.nodes();
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double h = nodes[fit.leaf_of_slot[i]].value;
            num += r[i] * h;
            den += h * h;
        }
        const double rho = den > 0.0 ? num / den : 1.0;
        const double step = options.learning_rate * rho;
        for (std::size_t i = 0; i < n; ++i) {
            f[i] += step * nodes[fit.leaf_of_slot[i]].value;
        }
        trees.push_back(std::move(fit.tree));
        weights.push_back(step);
        if (trace != nullptr) {
            trace->multipliers.push_back(rho);
            trace->train_mse.push_back(mse_of(y, f));
        }
    }
    return std::make_shared<const TreeEnsemble>(Combine::additive, f0, std::move(trees), std::move(weights));
}

} // namespace

std::shared_ptr<const TreeEnsemble> fit_gbm(const Matrix& x, std::span<const double> y, const BoostOptions& options,
                                           BoostTrace* trace)
{
    check_inputs(x, y, options);
    const PresortedColumns columns(x);
    const auto rows = all_rows(x.rows());
    const TreeParams params = unpenalized(options.tree);
    return first_order_boost(y, options, trace, [&](const std::vector<double>& g, const std::vector<double>& h) {
        return grow_tree(columns, rows, g, h, params);
    });
}

std::shared_ptr<const TreeEnsemble> fit_hgbm(const Matrix& x, std::span<const double> y, const BoostOptions& options,
                                            std::size_t n_bins, BoostTrace* trace)
{
    check_inputs(x, y, options);
    const BinnedColumns bins(x, n_bins);
    const TreeParams params = unpenalized(options.tree);
    return first_order_boost(y, options, trace, [&](const std::vector<double>& g, const std::vector<double>& h) {
        return grow_histogram_tree(bins, g, h, params);
    });
}

std::shared_ptr<const TreeEnsemble> fit_regularized_gbm(const Matrix& x, std::span<const double> y,
                                                       const BoostOptions& options, BoostTrace* trace)
{
    check_inputs(x, y, options);
    const auto& p = options.tree;
    if (p.l1 < 0.0 || p.l2 < 0.0 || p.gamma < 0.0) {
        throw InvalidArgument("regularization weights must be non-negative");
    }
    const std::size_t n = x.rows();
    const PresortedColumns columns(x);
    const auto rows = all_rows(n);
    TreeParams params = p;
    params.max_features = 0;
    params.random_thresholds = false;
    params.ccp_alpha = 0.0;

    const double f0 = mean_of(y);
    std::vector<double> f(n, f0);
    std::vector<double> grad(n);
    const std::vector<double> hess(n, 1.0);
    std::vector<Tree> trees;
    std::vector<double> weights;
    if (trace != nullptr) {
        *trace = {};
        trace->train_mse.push_back(mse_of(y, f));
    }
    for (std::size_t m = 0; m < options.n_stages; ++m) {
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = f[i] - y[i];
        }
        if (m == 0 && trace != nullptr) {
            trace->stage1_residuals.resize(n);
            std::transform(grad.begin(), grad.end(), trace->stage1_residuals.begin(), [](double g) { return -g; });
        }
        TreeFit fit = grow_tree(columns, rows, grad, hess, params);
        const auto& nodes = fit.tree.nodes();
        for (std::size_t i = 0; i < n; ++i) {
            f[i] += options.learning_rate * nodes[fit.leaf_of_slot[i]].value;
        }
        trees.push_back(std::move(fit.tree));
        weights.push_back(options.learning_rate);
        if (trace != nullptr) {
            trace->multipliers.push_back(1.0);
            trace->train_mse.push_back(mse_of(y, f));
        }
    }
    return std::make_shared<const TreeEnsemble>(Combine::additive, f0, std::move(trees), std::move(weights));
}

OrderedChain run_ordered_chain(const Matrix& x, std::span<const double> y, std::span<const std::size_t> permutation,
                               const OrderedOptions& options)
{
    check_inputs(x, y, options.boost);
    const std::size_t n = x.rows();
    if (permutation.size() != n) {
        throw DimensionError("permutation length must match the row count");
    }
    {
        std::vector<bool> seen(n, false);
        for (const auto p : permutation) {
            if (p >= n || seen[p]) {
                throw InvalidArgument("ordering is not a permutation of the rows");
            }
            seen[p] = true;
        }
    }
    const PresortedColumns columns(x);
    const auto rows = all_rows(n);
    const TreeParams params = unpenalized(options.boost.tree);
    const double rate = options.boost.learning_rate;

    OrderedChain chain;
    chain.permutation.assign(permutation.begin(), permutation.end());
    chain.base = mean_of(y);

    // Prefix predictions by position: start from the running mean of earlier targets.
    std::vector<double> prefix(n);
    {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            prefix[j] = j == 0 ? options.prior : sum / static_cast<double>(j);
            sum += y[permutation[j]];
        }
    }
    std::vector<double> f_inf(n, chain.base);
    std::vector<double> residual(n); // by position
    std::vector<double> grad(n);     // by row
    const std::vector<double> hess(n, 1.0);
    for (std::size_t t = 0; t < options.boost.n_stages; ++t) {
        chain.prefix_predictions.push_back(prefix);
        for (std::size_t j = 0; j < n; ++j) {
            residual[j] = y[permutation[j]] - prefix[j];
            grad[permutation[j]] = -residual[j];
        }
        TreeFit fit = grow_tree(columns, rows, grad, hess, params);
        const std::size_t node_count = fit.tree.nodes().size();

        // Inference leaves: mean of full-data residuals of the inference model.
        std::vector<double> leaf_sum(node_count, 0.0);
        std::vector<std::size_t> leaf_n(node_count, 0);
        for (std::size_t i = 0; i < n; ++i) {
            leaf_sum[fit.leaf_of_slot[i]] += y[i] - f_inf[i];
            ++leaf_n[fit.leaf_of_slot[i]];
        }
        for (std::size_t k = 0; k < node_count; ++k) {
            if (fit.tree.nodes()[k].is_leaf()) {
                fit.tree.set_value(k, leaf_n[k] > 0 ? leaf_sum[k] / static_cast<double>(leaf_n[k]) : 0.0);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            f_inf[i] += rate * fit.tree.nodes()[fit.leaf_of_slot[i]].value;
        }

        // Chain update: each position only sees residuals of earlier positions in its leaf.
        std::fill(leaf_sum.begin(), leaf_sum.end(), 0.0);
        std::fill(leaf_n.begin(), leaf_n.end(), 0);
        for (std::size_t j = 0; j < n; ++j) {
            const auto leaf = fit.leaf_of_slot[permutation[j]];
            if (leaf_n[leaf] > 0) {
                prefix[j] += rate * (leaf_sum[leaf] / static_cast<double>(leaf_n[leaf]));
            }
            leaf_sum[leaf] += residual[j];
            ++leaf_n[leaf];
        }
        chain.trees.push_back(std::move(fit.tree));
    }
    return chain;
}

std::shared_ptr<const TreeEnsemble> fit_ordered_gbm(const Matrix& x, std::span<const double> y,
                                                   const OrderedOptions& options)
{
    check_inputs(x, y, options.boost);
    if (options.n_permutations == 0) {
        throw InvalidArgument("ordered boosting needs at least one permutation");
    }
    std::vector<OrderedChain> chains(options.n_permutations);
    parallel_for(options.n_permutations, [&](std::size_t p) {
        Rng rng = make_rng(options.seed, {0x4f7264ULL, p});
        const auto perm = random_permutation(x.rows(), rng);
        chains[p] = run_ordered_chain(x, y, perm, options);
    });
    std::vector<Tree> trees;
    std::vector<double> weights;
    const double w = options.boost.learning_rate / static_cast<double>(options.n_permutations);
    for (auto& c : chains) {
        for (auto& t : c.trees) {
            trees.push_back(std::move(t));
            weights.push_back(w);
        }
    }
    return std::make_shared<const TreeEnsemble>(Combine::additive, mean_of(y), std::move(trees), std::move(weights));
}

} // namespace sagopt
