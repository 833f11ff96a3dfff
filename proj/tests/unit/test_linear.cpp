#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sagopt/error.hpp"
#include "sagopt/models/linear.hpp"
#include "sagopt/models/regressor.hpp"

using namespace sagopt;

namespace {

const LinearModel& linear_of(const FittedModel& m)
{
    const auto* l = m.as<LinearModel>();
    REQUIRE(l != nullptr);
    return *l;
}

Dataset noisy_linear(std::size_t n, std::size_t d, std::uint64_t seed)
{
    auto rng = make_rng(seed, {});
    const Matrix x = fixtures::random_matrix(n, d, rng, -2.0, 3.0);
    std::normal_distribution<double> eps(0.0, 0.3);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = 4.0;
        for (std::size_t j = 0; j < d; ++j) {
            y[i] += (static_cast<double>(j) - 1.5) * x(i, j);
        }
        y[i] += eps(rng);
    }
    return fixtures::make_dataset(x, y);
}

} // namespace

TEST_CASE("ols recovers an exact line")
{
    const Matrix x(5, 1, std::vector<double>{0, 1, 2, 3, 4});
    const auto m = fit({"ols", {}, 0}, fixtures::make_dataset(x, {1, 3, 5, 7, 9}));
    CHECK(linear_of(m).coef()[0] == doctest::Approx(2.0));
    CHECK(linear_of(m).intercept() == doctest::Approx(1.0));
}

TEST_CASE("ols on a rank-deficient design gives the minimum-norm slopes")
{
    Matrix x(6, 2);
    for (std::size_t i = 0; i < 6; ++i) {
        x(i, 0) = static_cast<double>(i);
        x(i, 1) = static_cast<double>(i);
    }
    const auto m = fit({"ols", {}, 0}, fixtures::make_dataset(x, {0, 2, 4, 6, 8, 10}));
    CHECK(linear_of(m).coef()[0] == doctest::Approx(1.0));
    CHECK(linear_of(m).coef()[1] == doctest::Approx(1.0));
}

TEST_CASE("lasso and elastic net with zero penalty reduce to ols")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto data = noisy_linear(40, 4, seed);
        const auto ols = linear_of(fit({"ols", {}, 0}, data));
        const auto lasso = linear_of(fit({"lasso", {{"lambda", "0"}}, 0}, data));
        const auto en = linear_of(fit({"elastic_net", {{"lambda1", "0"}, {"lambda2", "0"}}, 0}, data));
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(lasso.coef()[j] == doctest::Approx(ols.coef()[j]).epsilon(1e-6));
            CHECK(en.coef()[j] == doctest::Approx(ols.coef()[j]).epsilon(1e-6));
        }
        CHECK(lasso.intercept() == doctest::Approx(ols.intercept()).epsilon(1e-6));
    }
}

TEST_CASE("huge lasso penalty zeroes every slope")
{
    const auto data = noisy_linear(30, 3, 1);
    const auto m = linear_of(fit({"lasso", {{"lambda", "1e9"}}, 0}, data));
    double mean = 0.0;
    for (const double v : data.target()) {
        mean += v / 30.0;
    }
    for (const double c : m.coef()) {
        CHECK(c == 0.0);
    }
    CHECK(m.intercept() == doctest::Approx(mean));
}

TEST_CASE("elastic net with l1 = 0 matches the closed-form ridge solution")
{
    // Columns already centred with unit population std, so the standardized
    // problem is the raw one and the ridge oracle applies directly.
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto rng = make_rng(seed, {0x7269});
        Matrix x = fixtures::random_matrix(20, 5, rng);
        const auto st = Standardizer::fit(x);
        x = st.apply(x);
        std::vector<double> y(20);
        double ymean = 0.0;
        for (std::size_t i = 0; i < 20; ++i) {
            y[i] = x(i, 0) - 2.0 * x(i, 3) + uniform01(rng);
            ymean += y[i] / 20.0;
        }
        std::vector<double> yc(20);
        for (std::size_t i = 0; i < 20; ++i) {
            yc[i] = y[i] - ymean;
        }
        const double l2 = 0.7;
        const auto cd = fit_coordinate_descent(x, y, 0.0, l2, 1e-13, 100000);
        CHECK(cd.converged);
        const auto want = oracles::ridge_solve(x, yc, 2.0 * l2);
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(cd.model->coef()[j] == doctest::Approx(want[j]).epsilon(1e-6));
        }
    }
}

TEST_CASE("lasso solution satisfies the KKT conditions in standardized units")
{
    const auto data = noisy_linear(60, 5, 9);
    const double l1 = 4.0;
    const auto cd = fit_coordinate_descent(data.features(), data.target(), l1, 0.0, 1e-12, 100000);
    REQUIRE(cd.converged);
    const Matrix z = Standardizer::fit(data.features()).apply(data.features());
    double ymean = 0.0;
    for (const double v : data.target()) {
        ymean += v / 60.0;
    }
    for (std::size_t j = 0; j < 5; ++j) {
        double grad = 0.0; // z_j . (yc - Z w)
        for (std::size_t i = 0; i < 60; ++i) {
            double fit_i = 0.0;
            for (std::size_t k = 0; k < 5; ++k) {
                fit_i += z(i, k) * cd.standardized_coef[k];
            }
            grad += z(i, j) * (data.target()[i] - ymean - fit_i);
        }
        if (cd.standardized_coef[j] != 0.0) {
            CHECK(grad == doctest::Approx(l1 * (cd.standardized_coef[j] > 0 ? 1.0 : -1.0)).epsilon(1e-6));
        } else {
            CHECK(std::abs(grad) <= l1 + 1e-6);
        }
    }
}

TEST_CASE("sgd approaches least squares on well-conditioned data")
{
    const auto data = noisy_linear(200, 3, 4);
    const auto ols = linear_of(fit({"ols", {}, 0}, data));
    const auto sgd = linear_of(fit({"sgd", {{"learning_rate", "0.01"}, {"epochs", "200"}}, 5}, data));
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(sgd.coef()[j] == doctest::Approx(ols.coef()[j]).epsilon(0.05));
    }
    // deterministic for a fixed seed
    const auto again = linear_of(fit({"sgd", {{"learning_rate", "0.01"}, {"epochs", "200"}}, 5}, data));
    CHECK(again.coef() == sgd.coef());
}

TEST_CASE("standardizer")
{
    const Matrix x(3, 2, std::vector<double>{1, 5, 2, 5, 3, 5});
    const auto s = Standardizer::fit(x);
    CHECK(s.mean == std::vector<double>{2, 5});
    CHECK(s.scale[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(s.scale[1] == 1.0);
    CHECK(s.apply(x)(2, 1) == 0.0);
}
