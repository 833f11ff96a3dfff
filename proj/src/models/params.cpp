#include "sagopt/models/params.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sagopt/csv.hpp"
#include "sagopt/error.hpp"

namespace sagopt {

namespace {

ParamDecl real_param(std::string key, std::string def, double lo, double hi, std::string help)
{
    return {std::move(key), ParamType::real, std::move(def), lo, hi, {}, std::move(help)};
}

ParamDecl int_param(std::string key, std::string def, double lo, double hi, std::string help)
{
    return {std::move(key), ParamType::integer, std::move(def), lo, hi, {}, std::move(help)};
}

ParamDecl bool_param(std::string key, std::string def, std::string help)
{
    return {std::move(key), ParamType::boolean, std::move(def), 0, 1, {}, std::move(help)};
}

ParamDecl choice_param(std::string key, std::string def, std::vector<std::string> choices, std::string help)
{
    return {std::move(key), ParamType::choice, std::move(def), 0, 0, std::move(choices), std::move(help)};
}

constexpr double inf = HUGE_VAL;

std::vector<FamilyInfo> build_registry()
{
    const auto depth = [](const char* def) {
        return int_param("max_depth", def, 0, 64, "maximum tree depth (0 = single leaf)");
    };
    const auto leaf = [](const char* def) {
        return int_param("min_samples_leaf", def, 1, inf, "minimum samples in each leaf");
    };
    const auto stages = int_param("n_stages", "100", 0, 100000, "boosting stages");
    const auto rate = real_param("learning_rate", "0.1", 1e-12, 1.0, "shrinkage applied to every stage");

    std::vector<FamilyInfo> reg;
    reg.push_back({"ols", true, "ordinary least squares (minimum-norm on singular designs)", {}});
    reg.push_back({"lasso", true, "L1-penalized least squares by cyclic coordinate descent",
                   {real_param("lambda", "1", 0, inf, "L1 penalty weight"),
                    real_param("tol", "1e-9", 0, inf, "stop when the largest coefficient change falls below this"),
                    int_param("max_iter", "10000", 1, inf, "coordinate-descent sweeps")}});
    reg.push_back({"elastic_net", true, "L1+L2-penalized least squares by cyclic coordinate descent",
                   {real_param("lambda1", "1", 0, inf, "L1 penalty weight"),
                    real_param("lambda2", "1", 0, inf, "L2 penalty weight (squared norm)"),
                    real_param("tol", "1e-9", 0, inf, "stop when the largest coefficient change falls below this"),
                    int_param("max_iter", "10000", 1, inf, "coordinate-descent sweeps")}});
    reg.push_back({"sgd", true, "least squares by per-sample stochastic gradient descent",
                   {real_param("learning_rate", "0.001", 1e-12, inf, "step size"),
                    int_param("epochs", "20", 1, inf, "passes over the shuffled training rows")}});
    reg.push_back({"knn", true, "k-nearest-neighbour average under standardized Euclidean distance",
                   {int_param("k", "5", 1, inf, "neighbour count"),
                    choice_param("weighting", "uniform", {"uniform", "inverse_distance"}, "neighbour weighting")}});
    reg.push_back({"cart", true, "regression tree with variance-reduction splits and cost-complexity pruning",
                   {depth("8"), leaf("5"), real_param("ccp_alpha", "0", 0, inf, "cost-complexity pruning strength")}});
    reg.push_back({"random_forest", true, "bootstrap-aggregated trees with per-node feature subsampling",
                   {int_param("n_trees", "100", 1, 100000, "trees in the forest"),
                    int_param("max_features", "0", 0, inf, "candidate features per node (0 = ceil(d/3))"),
                    depth("12"), leaf("2"), bool_param("bootstrap", "true", "resample rows per tree")}});
    reg.push_back({"extra_trees", true, "randomized-threshold trees grown on all rows",
                   {int_param("n_trees", "100", 1, 100000, "trees in the forest"),
                    int_param("max_features", "0", 0, inf, "candidate features per node (0 = d)"), depth("12"), leaf("2")}});
    reg.push_back({"adaboost_r2", true, "AdaBoost.R2 with linear loss and weighted-median combination",
                   {int_param("n_estimators", "50", 1, 100000, "maximum boosting rounds"), depth("3"), leaf("1")}});
    reg.push_back({"gbm", true, "gradient boosting on squared loss with line-searched stage multipliers",
                   {stages, rate, depth("3"), leaf("1")}});
    reg.push_back({"regularized_gbm", true, "second-order boosting with L1/L2 leaf penalties and per-leaf cost",
                   {stages, rate, depth("4"), leaf("1"), real_param("lambda", "1", 0, inf, "L2 leaf-weight penalty"),
                    real_param("alpha", "0", 0, inf, "L1 leaf-weight penalty"),
                    real_param("gamma", "0", 0, inf, "minimum split gain (per-leaf cost)")}});
    reg.push_back({"hgbm", true, "gradient boosting with splits restricted to equal-frequency bin boundaries",
                   {stages, rate, depth("3"), leaf("1"), int_param("n_bins", "255", 1, 1u << 30, "bins per feature")}});
    reg.push_back({"ordered_gbm", true, "ordered boosting: residuals from prefix models over random permutations",
                   {stages, rate, depth("4"), leaf("1"), int_param("n_permutations", "4", 1, 1000, "independent permutations"),
                    real_param("prior", "0", -inf, inf, "prefix prediction used when no earlier sample exists")}});

    reg.push_back({"svm", false, "epsilon-SVR (quadratic program) - out of scope for this toolkit", {}});
    reg.push_back({"bayesian", false, "Bayesian linear regression - out of scope for this toolkit", {}});
    reg.push_back({"mlp", false, "multi-layer perceptron with backpropagation - out of scope for this toolkit", {}});
    reg.push_back({"lstm", false, "LSTM recurrent network - out of scope for this toolkit", {}});
    return reg;
}

bool parse_bool(const std::string& s, bool& out)
{
    if (s == "true" || s == "1") {
        out = true;
        return true;
    }
    if (s == "false" || s == "0") {
        out = false;
        return true;
    }
    return false;
}

} // namespace

const std::vector<FamilyInfo>& family_registry()
{
    static const std::vector<FamilyInfo> registry = build_registry();
    return registry;
}

const FamilyInfo& family_info(std::string_view name)
{
    for (const auto& f : family_registry()) {
        if (f.name == name) {
            return f;
        }
    }
    throw ConfigError(fmt::format("unknown regressor family '{}'", name));
}

ResolvedParams::ResolvedParams(const FamilyInfo& family, const std::map<std::string, std::string>& overrides)
{
    for (const auto& [key, value] : overrides) {
        const auto it = std::find_if(family.params.begin(), family.params.end(), [&](const ParamDecl& d) { return d.key == key; });
        if (it == family.params.end()) {
            throw ConfigError(fmt::format("family '{}' has no hyperparameter '{}'", family.name, key));
        }
    }
    for (const auto& decl : family.params) {
        const auto it = overrides.find(decl.key);
        const std::string value = it != overrides.end() ? it->second : decl.default_value;
        const auto bad = [&](std::string_view why) {
            return ConfigError(fmt::format("{}.{} = '{}': {}", family.name, decl.key, value, why));
        };
        switch (decl.type) {
        case ParamType::real:
        case ParamType::integer: {
            const auto v = csv::parse_real(value);
            if (!v || std::isnan(*v)) {
                throw bad("not a number");
            }
            if (decl.type == ParamType::integer && *v != std::floor(*v)) {
                throw bad("must be an integer");
            }
            if (*v < decl.min || *v > decl.max) {
                throw bad(fmt::format("outside [{}, {}]", decl.min, decl.max));
            }
            break;
        }
        case ParamType::boolean: {
            bool b = false;
            if (!parse_bool(value, b)) {
                throw bad("must be true or false");
            }
            break;
        }
        case ParamType::choice:
            if (std::find(decl.choices.begin(), decl.choices.end(), value) == decl.choices.end()) {
                throw bad("not one of the allowed choices");
            }
            break;
        }
        values_.emplace(decl.key, value);
    }
}

const std::string& ResolvedParams::raw(std::string_view key) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError(fmt::format("hyperparameter '{}' not declared", key));
    }
    return it->second;
}

double ResolvedParams::real(std::string_view key) const { return *csv::parse_real(raw(key)); }

long long ResolvedParams::integer(std::string_view key) const { return static_cast<long long>(*csv::parse_real(raw(key))); }

bool ResolvedParams::flag(std::string_view key) const
{
    bool b = false;
    parse_bool(raw(key), b);
    return b;
}

const std::string& ResolvedParams::choice(std::string_view key) const { return raw(key); }

ResolvedParams resolve_params(const RegressorSpec& spec)
{
    const auto& info = family_info(spec.family);
    if (!info.implemented) {
        throw UnimplementedError(fmt::format(
            "regressor family '{}' is registered but not implemented ({}); the implemented roster is "
            "ols, lasso, elastic_net, sgd, knn, cart, extra_trees, random_forest, adaboost_r2, gbm, "
            "regularized_gbm, hgbm, ordered_gbm",
            spec.family, info.description));
    }
    return {info, spec.hyperparameters};
}

} // namespace sagopt
