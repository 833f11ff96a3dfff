#include "sagopt/models/regressor.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "sagopt/error.hpp"
#include "sagopt/models/boosting.hpp"
#include "sagopt/models/ensemble.hpp"
#include "sagopt/models/knn.hpp"
#include "sagopt/models/linear.hpp"

namespace sagopt {

FittedModel::FittedModel(RegressorSpec spec, std::vector<std::string> feature_names,
                         std::shared_ptr<const Regressor> impl, std::vector<std::string> warnings)
    : spec_(std::move(spec)), feature_names_(std::move(feature_names)), impl_(std::move(impl)),
      warnings_(std::move(warnings))
{
    if (!impl_) {
        throw InvalidArgument("fitted model has no implementation");
    }
}

double FittedModel::predict_row(std::span<const double> x) const
{
    if (x.size() != feature_names_.size()) {
        throw DimensionError(fmt::format("model expects {} features, got {}", feature_names_.size(), x.size()));
    }
    return impl_->predict_row(x);
}

std::vector<double> FittedModel::predict(const Matrix& rows) const
{
    if (rows.cols() != feature_names_.size() && !(rows.rows() == 0 && rows.cols() == 0)) {
        throw DimensionError(fmt::format("model expects {} features, got {}", feature_names_.size(), rows.cols()));
    }
    std::vector<double> out(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        out[i] = impl_->predict_row(rows.row(i));
    }
    return out;
}

namespace {

std::size_t as_size(long long v) { return static_cast<std::size_t>(v); }

TreeParams tree_params(const ResolvedParams& p)
{
    TreeParams t;
    t.max_depth = as_size(p.integer("max_depth"));
    t.min_samples_leaf = as_size(p.integer("min_samples_leaf"));
    return t;
}

BoostOptions boost_options(const ResolvedParams& p)
{
    BoostOptions b;
    b.n_stages = as_size(p.integer("n_stages"));
    b.learning_rate = p.real("learning_rate");
    b.tree = tree_params(p);
    return b;
}

} // namespace

FittedModel fit(const RegressorSpec& spec, const Dataset& data)
{
    const ResolvedParams p = resolve_params(spec);
    const Matrix& x = data.features();
    const auto y = data.target();
    const std::string& family = spec.family;
    std::vector<std::string> warnings;
    std::shared_ptr<const Regressor> impl;

    if (family == "ols") {
        impl = fit_ols(x, y);
    } else if (family == "lasso" || family == "elastic_net") {
        const bool lasso = family == "lasso";
        const auto cd = fit_coordinate_descent(x, y, lasso ? p.real("lambda") : p.real("lambda1"),
                                               lasso ? 0.0 : p.real("lambda2"), p.real("tol"),
                                               as_size(p.integer("max_iter")));
        if (!cd.converged) {
            warnings.push_back(fmt::format("coordinate descent did not converge within {} sweeps", cd.sweeps));
        }
        impl = cd.model;
    } else if (family == "sgd") {
        impl = fit_sgd(x, y, p.real("learning_rate"), as_size(p.integer("epochs")), spec.seed);
    } else if (family == "knn") {
        const auto k = as_size(p.integer("k"));
        const auto weighting =
            p.choice("weighting") == "uniform" ? KnnWeighting::uniform : KnnWeighting::inverse_distance;
        impl = std::make_shared<const KnnModel>(x, std::vector<double>(y.begin(), y.end()), k, weighting);
    } else if (family == "cart") {
        TreeParams t = tree_params(p);
        t.ccp_alpha = p.real("ccp_alpha");
        const PresortedColumns columns(x);
        std::vector<Tree> trees{grow_regression_tree(columns, y, t)};
        impl = std::make_shared<const TreeEnsemble>(Combine::average, 0.0, std::move(trees), std::vector<double>{1.0});
    } else if (family == "random_forest" || family == "extra_trees") {
        const bool rf = family == "random_forest";
        ForestOptions o;
        o.n_trees = as_size(p.integer("n_trees"));
        o.tree = tree_params(p);
        const std::size_t d = x.cols();
        const auto requested = as_size(p.integer("max_features"));
        o.tree.max_features = requested != 0 ? requested : (rf ? std::max<std::size_t>(1, (d + 2) / 3) : d);
        o.tree.random_thresholds = !rf;
        o.bootstrap = rf && p.flag("bootstrap");
        o.seed = spec.seed;
        impl = fit_forest(x, y, o);
    } else if (family == "adaboost_r2") {
        AdaBoostOptions o;
        o.n_estimators = as_size(p.integer("n_estimators"));
        o.tree = tree_params(p);
        o.seed = spec.seed;
        impl = fit_adaboost_r2(x, y, o, nullptr, &warnings);
    } else if (family == "gbm") {
        impl = fit_gbm(x, y, boost_options(p));
    } else if (family == "regularized_gbm") {
        BoostOptions b = boost_options(p);
        b.tree.l2 = p.real("lambda");
        b.tree.l1 = p.real("alpha");
        b.tree.gamma = p.real("gamma");
        impl = fit_regularized_gbm(x, y, b);
    } else if (family == "hgbm") {
        impl = fit_hgbm(x, y, boost_options(p), as_size(p.integer("n_bins")));
    } else if (family == "ordered_gbm") {
        OrderedOptions o;
        o.boost = boost_options(p);
        o.n_permutations = as_size(p.integer("n_permutations"));
        o.prior = p.real("prior");
        o.seed = spec.seed;
        impl = fit_ordered_gbm(x, y, o);
    } else {
        throw ConfigError(fmt::format("no trainer for family '{}'", family));
    }
    return FittedModel(spec, data.feature_names(), std::move(impl), std::move(warnings));
}

} // namespace sagopt
