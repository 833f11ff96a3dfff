#include <doctest.h>

#include "fixtures.hpp"
#include "sagopt/error.hpp"
#include "sagopt/models/knn.hpp"
#include "sagopt/models/regressor.hpp"

using namespace sagopt;

TEST_CASE("query on a training point with k=1 returns its target")
{
    auto rng = make_rng(1, {});
    const Matrix x = fixtures::random_matrix(30, 3, rng);
    std::vector<double> y(30);
    for (std::size_t i = 0; i < 30; ++i) {
        y[i] = static_cast<double>(i);
    }
    const KnnModel m(x, y, 1, KnnWeighting::uniform);
    for (std::size_t i = 0; i < 30; ++i) {
        CHECK(m.predict_row(x.row(i)) == y[i]);
        CHECK(knn_predict(m, x.row(i), 3, KnnWeighting::inverse_distance) == y[i]);
    }
    double mean = 0.0;
    for (const double v : y) {
        mean += v / 30.0;
    }
    CHECK(knn_predict(m, x.row(0), 30, KnnWeighting::uniform) == doctest::Approx(mean));
}

TEST_CASE("1-D hand example")
{
    const Matrix x(2, 1, std::vector<double>{0, 10});
    const KnnModel m(x, {0, 100}, 2, KnnWeighting::uniform);
    CHECK(m.predict_row(std::vector<double>{1}) == 50.0);
    // distances 1 and 9 (times the same scale): weights 1 and 1/9
    CHECK(knn_predict(m, std::vector<double>{1}, 2, KnnWeighting::inverse_distance) ==
          doctest::Approx(100.0 * (1.0 / 9.0) / (1.0 + 1.0 / 9.0)));
}

TEST_CASE("ties at the k-th distance go to the lower training index")
{
    // Zero-mean column, so standardization keeps the two distances exactly equal.
    const Matrix x(4, 1, std::vector<double>{-1, 1, -3, 3});
    const KnnModel m(x, {10, 20, 30, 40}, 1, KnnWeighting::uniform);
    CHECK(m.predict_row(std::vector<double>{0}) == 10.0);
}

TEST_CASE("k range and width checks")
{
    const Matrix x(2, 1, std::vector<double>{0, 1});
    CHECK_THROWS_AS(KnnModel(x, {0, 1}, 3, KnnWeighting::uniform), InvalidArgument);
    CHECK_THROWS_AS(KnnModel(x, {0, 1}, 0, KnnWeighting::uniform), InvalidArgument);
    const auto fitted = fit({"knn", {{"k", "2"}}, 0}, fixtures::make_dataset(x, {0, 1}));
    CHECK_THROWS_AS((void)fitted.predict_row(std::vector<double>{1, 2}), DimensionError);
}
