#include "sagopt/models/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "sagopt/error.hpp"
#include "sagopt/parallel.hpp"
#include "sagopt/random.hpp"

namespace sagopt {

namespace {

const char* combine_name(Combine c)
{
    switch (c) {
    case Combine::additive:
        return "additive";
    case Combine::average:
        return "average";
    case Combine::weighted_median:
        return "weighted_median";
    }
    return "?";
}

void check_xy(const Matrix& x, std::span<const double> y)
{
    if (x.rows() != y.size()) {
        throw DimensionError("feature rows and target length differ");
    }
    if (x.rows() == 0) {
        throw InvalidArgument("cannot fit on zero rows");
    }
}

} // namespace

TreeEnsemble::TreeEnsemble(Combine combine, double base, std::vector<Tree> trees, std::vector<double> weights)
    : combine_(combine), base_(base), trees_(std::move(trees)), weights_(std::move(weights))
{
    if (weights_.size() != trees_.size()) {
        throw DimensionError("ensemble needs one weight per tree");
    }
    if (combine_ != Combine::additive && trees_.empty()) {
        throw InvalidArgument("averaging ensembles need at least one tree");
    }
}

double TreeEnsemble::predict_row(std::span<const double> x) const
{
    switch (combine_) {
    case Combine::additive: {
        double f = base_;
        for (std::size_t i = 0; i < trees_.size(); ++i) {
            f += weights_[i] * trees_[i].predict(x);
        }
        return f;
    }
    case Combine::average: {
        double s = 0.0;
        for (const auto& t : trees_) {
            s += t.predict(x);
        }
        return s / static_cast<double>(trees_.size());
    }
    case Combine::weighted_median:
        return weighted_median(member_predictions(x), weights_);
    }
    return 0.0;
}

std::vector<double> TreeEnsemble::member_predictions(std::span<const double> x) const
{
    std::vector<double> out(trees_.size());
    for (std::size_t i = 0; i < trees_.size(); ++i) {
        out[i] = trees_[i].predict(x);
    }
    return out;
}

Json TreeEnsemble::to_json() const
{
    Json trees = Json::array();
    for (const auto& t : trees_) {
        Json feature = Json::array();
        Json threshold = Json::array();
        Json left = Json::array();
        Json right = Json::array();
        Json value = Json::array();
        Json samples = Json::array();
        for (const auto& n : t.nodes()) {
            feature.push_back(n.feature);
            threshold.push_back(n.threshold);
            left.push_back(n.left);
            right.push_back(n.right);
            value.push_back(n.value);
            samples.push_back(n.samples);
        }
        trees.push_back(Json{{"feature", std::move(feature)},
                             {"threshold", std::move(threshold)},
                             {"left", std::move(left)},
                             {"right", std::move(right)},
                             {"value", std::move(value)},
                             {"samples", std::move(samples)}});
    }
    return Json{{"kind", "tree_ensemble"},
                {"combine", combine_name(combine_)},
                {"base", base_},
                {"weights", weights_},
                {"trees", std::move(trees)}};
}

std::string TreeEnsemble::summary() const
{
    std::size_t leaves = 0;
    std::size_t depth = 0;
    for (const auto& t : trees_) {
        leaves += t.leaf_count();
        depth = std::max(depth, t.depth());
    }
    return fmt::format("tree ensemble ({}): {} trees, {} leaves, max depth {}, base {}", combine_name(combine_),
                       trees_.size(), leaves, depth, base_);
}

double weighted_median(std::span<const double> values, std::span<const double> weights)
{
    if (values.size() != weights.size() || values.empty()) {
        throw DimensionError("weighted median needs equal, non-empty value and weight lists");
    }
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double acc = 0.0;
    for (const auto i : idx) {
        acc += weights[i];
        if (acc >= 0.5 * total) {
            return values[i];
        }
    }
    return values[idx.back()];
}

std::shared_ptr<const TreeEnsemble> fit_forest(const Matrix& x, std::span<const double> y, const ForestOptions& options)
{
    check_xy(x, y);
    if (options.n_trees == 0) {
        throw InvalidArgument("a forest needs at least one tree");
    }
    if (options.tree.max_features > x.cols()) {
        throw InvalidArgument(fmt::format("max_features {} exceeds the {} available features", options.tree.max_features,
                                          x.cols()));
    }
    const PresortedColumns columns(x);
    const std::size_t n = x.rows();
    std::vector<double> grad(y.size());
    std::transform(y.begin(), y.end(), grad.begin(), [](double v) { return -v; });
    TreeParams params = options.tree;
    params.l1 = params.l2 = params.gamma = 0.0;
    std::vector<Tree> trees(options.n_trees);
    parallel_for(options.n_trees, [&](std::size_t t) {
        Rng rng = make_rng(options.seed, {0x466f72ULL, t});
        std::vector<std::uint32_t> slots(n);
        if (options.bootstrap) {
            for (auto& s : slots) {
                s = static_cast<std::uint32_t>(uniform_index(rng, n));
            }
        } else {
            std::iota(slots.begin(), slots.end(), 0U);
        }
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = grad[slots[i]];
        }
        const std::vector<double> h(n, 1.0);
        trees[t] = grow_tree(columns, slots, g, h, params, &rng).tree;
    });
    std::vector<double> weights(trees.size(), 1.0);
    return std::make_shared<const TreeEnsemble>(Combine::average, 0.0, std::move(trees), std::move(weights));
}

std::shared_ptr<const TreeEnsemble> fit_adaboost_r2(const Matrix& x, std::span<const double> y,
                                                   const AdaBoostOptions& options, AdaBoostTrace* trace,
                                                   std::vector<std::string>* warnings)
{
    check_xy(x, y);
    if (options.n_estimators == 0) {
        throw InvalidArgument("adaboost needs at least one estimator");
    }
    constexpr double perfect_eps = 1e-12;
    const std::size_t n = x.rows();
    const PresortedColumns columns(x);
    TreeParams params = options.tree;
    params.l1 = params.l2 = params.gamma = 0.0;
    params.max_features = 0;
    params.random_thresholds = false;

    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    if (trace != nullptr) {
        *trace = {};
        trace->sample_weights.push_back(w);
    }
    std::vector<Tree> trees;
    std::vector<double> learner_weights;
    Rng rng = make_rng(options.seed, {0x416461ULL});
    std::vector<double> pred(n);
    std::vector<double> err(n);
    for (std::size_t round = 0; round < options.n_estimators; ++round) {
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        std::vector<std::uint32_t> slots(n);
        for (auto& s : slots) {
            s = static_cast<std::uint32_t>(pick(rng));
        }
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = -y[slots[i]];
        }
        const std::vector<double> h(n, 1.0);
        Tree tree = grow_tree(columns, slots, g, h, params).tree;

        double max_err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = tree.predict(x.row(i));
            err[i] = std::abs(pred[i] - y[i]);
            max_err = std::max(max_err, err[i]);
        }
        double avg_loss = 0.0;
        for (std::size_t i = 0; max_err > 0.0 && i < n; ++i) {
            avg_loss += w[i] * err[i] / max_err;
        }
        if (avg_loss <= 0.0) {
            trees.push_back(std::move(tree));
            learner_weights.push_back(std::log(1.0 / perfect_eps));
            if (trace != nullptr) {
                trace->average_loss.push_back(0.0);
                trace->learner_weight.push_back(learner_weights.back());
                trace->sample_weights.push_back(w);
                trace->perfect_stop = true;
            }
            break;
        }
        if (avg_loss >= 0.5) {
            if (trees.empty()) {
                trees.push_back(std::move(tree));
                learner_weights.push_back(1.0);
                if (trace != nullptr) {
                    trace->average_loss.push_back(avg_loss);
                    trace->learner_weight.push_back(1.0);
                    trace->sample_weights.push_back(w);
                    trace->degenerate_first = true;
                }
                if (warnings != nullptr) {
                    warnings->push_back(fmt::format(
                        "degenerate boost: first learner has average loss {} >= 0.5; model keeps that single learner",
                        avg_loss));
                }
            }
            break;
        }
        const double beta = avg_loss / (1.0 - avg_loss);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] *= std::pow(beta, 1.0 - err[i] / max_err);
            total += w[i];
        }
        for (auto& v : w) {
            v /= total;
        }
        trees.push_back(std::move(tree));
        learner_weights.push_back(std::log(1.0 / beta));
        if (trace != nullptr) {
            trace->average_loss.push_back(avg_loss);
            trace->learner_weight.push_back(learner_weights.back());
            trace->sample_weights.push_back(w);
        }
    }
    return std::make_shared<const TreeEnsemble>(Combine::weighted_median, 0.0, std::move(trees),
                                                std::move(learner_weights));
}

} // namespace sagopt
