#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sagopt/error.hpp"
#include "sagopt/models/boosting.hpp"
#include "sagopt/models/regressor.hpp"

using namespace sagopt;

namespace {

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

BoostOptions small(std::size_t stages, std::size_t depth)
{
    BoostOptions o;
    o.n_stages = stages;
    o.tree.max_depth = depth;
    return o;
}

} // namespace

TEST_CASE("zero stages predict the mean")
{
    const auto data = fixtures::random_regression(40, 3, 1);
    const auto e = fit_gbm(data.features(), data.target(), small(0, 3));
    CHECK(e->predict_row(data.row(0)) == mean_of(data.target()));
}

TEST_CASE("stage-1 pseudo-residuals are y - mean(y) exactly")
{
    const auto data = fixtures::random_regression(80, 3, 2);
    BoostTrace trace;
    (void)fit_gbm(data.features(), data.target(), small(3, 3), &trace);
    const double m = mean_of(data.target());
    for (std::size_t i = 0; i < 80; ++i) {
        CHECK(trace.stage1_residuals[i] == data.target()[i] - m);
    }
}

TEST_CASE("training MSE never increases")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto data = fixtures::random_regression(100, 4, seed);
        for (const double rate : {0.1, 1.0}) {
            auto o = small(60, 3);
            o.learning_rate = rate;
            BoostTrace t;
            (void)fit_gbm(data.features(), data.target(), o, &t);
            for (std::size_t m = 1; m < t.train_mse.size(); ++m) {
                CHECK(t.train_mse[m] <= t.train_mse[m - 1] * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("prediction equals manual stage accumulation on a 5-row instance")
{
    const Matrix x(5, 1, std::vector<double>{0, 1, 2, 3, 4});
    const std::vector<double> y{1, 4, 2, 8, 5};
    auto o = small(4, 1);
    o.learning_rate = 0.5;
    const auto e = fit_gbm(x, y, o);
    for (std::size_t i = 0; i < 5; ++i) {
        double f = mean_of(y);
        for (std::size_t m = 0; m < e->trees().size(); ++m) {
            f += e->weights()[m] * e->trees()[m].predict(x.row(i));
        }
        CHECK(e->predict_row(x.row(i)) == doctest::Approx(f).epsilon(1e-14));
    }
    // weight = rate * rho, and rho = 1 for least-squares leaves
    for (const double w : e->weights()) {
        CHECK(w == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("penalty-free regularized boosting matches gbm")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto data = fixtures::random_regression(90, 3, seed);
        const auto a = fit_gbm(data.features(), data.target(), small(30, 3));
        const auto b = fit_regularized_gbm(data.features(), data.target(), small(30, 3));
        for (std::size_t i = 0; i < 90; ++i) {
            CHECK(a->predict_row(data.row(i)) == doctest::Approx(b->predict_row(data.row(i))).epsilon(1e-9));
        }
    }
}

TEST_CASE("single penalized leaf weight is sum(r)/(n + lambda)")
{
    const Matrix x(6, 1, std::vector<double>{0, 1, 2, 3, 4, 5});
    const std::vector<double> r{1.5, -0.5, 2.0, 3.0, 0.25, 1.0};
    std::vector<double> grad(6);
    for (std::size_t i = 0; i < 6; ++i) {
        grad[i] = -r[i];
    }
    const std::vector<double> hess(6, 1.0);
    const std::vector<std::uint32_t> rows{0, 1, 2, 3, 4, 5};
    TreeParams p;
    p.max_depth = 0;
    p.l2 = 2.5;
    const auto fit = grow_tree(PresortedColumns(x), rows, grad, hess, p);
    CHECK(fit.tree.nodes()[0].value == doctest::Approx(7.25 / (6.0 + 2.5)).epsilon(1e-12));
    // L1 soft-thresholds the gradient sum before dividing.
    p.l1 = 1.0;
    const auto fit1 = grow_tree(PresortedColumns(x), rows, grad, hess, p);
    CHECK(fit1.tree.nodes()[0].value == doctest::Approx((7.25 - 0.5) / (6.0 + 2.5)).epsilon(1e-12));
}

TEST_CASE("gamma above every achievable gain keeps each stage a single leaf")
{
    const auto data = fixtures::random_regression(10, 2, 3);
    auto o = small(5, 3);
    o.tree.gamma = 1e9;
    const auto e = fit_regularized_gbm(data.features(), data.target(), o);
    for (const auto& t : e->trees()) {
        CHECK(t.nodes().size() == 1);
    }
    CHECK(e->predict_row(data.row(0)) == doctest::Approx(mean_of(data.target())).epsilon(1e-12));
}

TEST_CASE("histogram boosting")
{
    const auto data = fixtures::random_regression(50, 3, 4);
    SUBCASE("one bin cannot split")
    {
        const auto e = fit_hgbm(data.features(), data.target(), small(10, 3), 1);
        CHECK(e->predict_row(data.row(3)) == doctest::Approx(mean_of(data.target())).epsilon(1e-12));
    }
    SUBCASE("lossless binning reproduces exact boosting")
    {
        const auto a = fit_gbm(data.features(), data.target(), small(20, 3));
        const auto b = fit_hgbm(data.features(), data.target(), small(20, 3), 255);
        auto rng = make_rng(1, {});
        const Matrix probe = fixtures::random_matrix(100, 3, rng);
        for (std::size_t i = 0; i < 50; ++i) {
            CHECK(a->predict_row(data.row(i)) == doctest::Approx(b->predict_row(data.row(i))).epsilon(1e-9));
        }
        for (std::size_t i = 0; i < 100; ++i) {
            CHECK(a->predict_row(probe.row(i)) == doctest::Approx(b->predict_row(probe.row(i))).epsilon(1e-9));
        }
    }
}

TEST_CASE("ordered boosting: one sample uses the prior only")
{
    const Matrix x(1, 2, std::vector<double>{0.5, 0.5});
    OrderedOptions o;
    o.boost = small(3, 2);
    o.prior = 0.0;
    const std::vector<double> y{4.0};
    const std::vector<std::size_t> perm{0};
    const auto chain = run_ordered_chain(x, y, perm, o);
    for (const auto& stage : chain.prefix_predictions) {
        CHECK(stage[0] == 0.0);
    }
    const auto e = fit_ordered_gbm(x, y, o);
    CHECK(e->predict_row(x.row(0)) == doctest::Approx(4.0));
}

TEST_CASE("ordered boosting: 3-sample, 1-stage hand trace")
{
    // Sorted data, identity permutation, prior 0, stump of depth 0 so every
    // sample shares one leaf. Prefix predictions: 0, y0, (y0+y1)/2.
    const Matrix x(3, 1, std::vector<double>{1, 2, 3});
    const std::vector<double> y{2, 4, 9};
    OrderedOptions o;
    o.boost = small(2, 0);
    o.boost.learning_rate = 0.5;
    const std::vector<std::size_t> perm{0, 1, 2};
    const auto chain = run_ordered_chain(x, y, perm, o);
    REQUIRE(chain.prefix_predictions.size() == 2);
    CHECK(chain.prefix_predictions[0] == std::vector<double>{0.0, 2.0, 3.0});
    // residuals r = {2, 2, 6}; stage-2 prefix adds 0.5 * mean of earlier residuals
    CHECK(chain.prefix_predictions[1][0] == 0.0);
    CHECK(chain.prefix_predictions[1][1] == 2.0 + 0.5 * 2.0);
    CHECK(chain.prefix_predictions[1][2] == 3.0 + 0.5 * 2.0);
    // Inference leaf on the first stage is the mean residual of the full-data base model.
    CHECK(chain.base == 5.0);
    CHECK(chain.trees[0].nodes()[0].value == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("ordered boosting: prefix predictions never read the sample itself")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t n = 10 + 2 * seed;
        const auto data = fixtures::random_regression(n, 3, seed);
        OrderedOptions o;
        o.boost = small(6, 2);
        o.boost.learning_rate = 0.3;
        o.prior = 1.5;
        auto rng = make_rng(seed, {3});
        const auto perm = random_permutation(n, rng);
        const auto chain = run_ordered_chain(data.features(), data.target(), perm, o);

        std::vector<std::vector<std::size_t>> leaf(chain.trees.size(), std::vector<std::size_t>(n));
        for (std::size_t t = 0; t < chain.trees.size(); ++t) {
            for (std::size_t j = 0; j < n; ++j) {
                leaf[t][j] = chain.trees[t].leaf_index(data.row(perm[j]));
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> y(n, std::nan(""));
            for (std::size_t i = 0; i < j; ++i) {
                y[i] = data.target()[perm[i]];
            }
            const auto want = oracles::ordered_prefix(y, leaf, j, 0.3, 1.5);
            for (std::size_t t = 0; t < chain.trees.size(); ++t) {
                CHECK(chain.prefix_predictions[t][j] == want[t]);
            }
        }
    }
}

TEST_CASE("every family predicts finite values of the right length and is deterministic")
{
    const auto data = fixtures::random_regression(120, 4, 9);
    for (const auto& f : family_registry()) {
        if (!f.implemented) {
            CHECK_THROWS_AS((void)fit({f.name, {}, 1}, data), UnimplementedError);
            continue;
        }
        std::map<std::string, std::string> hp;
        if (f.name == "random_forest" || f.name == "extra_trees") {
            hp["n_trees"] = "10";
        }
        const auto a = fit({f.name, hp, 3}, data);
        const auto b = fit({f.name, hp, 3}, data);
        const auto pa = a.predict(data.features());
        CHECK(pa.size() == 120);
        for (const double v : pa) {
            CHECK(std::isfinite(v));
        }
        CHECK(pa == b.predict(data.features()));
        CHECK_THROWS_AS((void)a.predict_row(std::vector<double>{1.0}), DimensionError);
    }
}

TEST_CASE("hyperparameter validation")
{
    const auto data = fixtures::random_regression(30, 2, 1);
    CHECK_THROWS_AS((void)fit({"gbm", {{"n_stagez", "5"}}, 0}, data), ConfigError);
    CHECK_THROWS_AS((void)fit({"gbm", {{"learning_rate", "abc"}}, 0}, data), ConfigError);
    CHECK_THROWS_AS((void)fit({"knn", {{"weighting", "cosine"}}, 0}, data), ConfigError);
    CHECK_THROWS_AS((void)fit({"svm", {}, 0}, data), UnimplementedError);
    CHECK_THROWS_AS((void)fit({"nope", {}, 0}, data), ConfigError);
}
