#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sagopt/error.hpp"
#include "sagopt/preprocess/lof.hpp"

using namespace sagopt;

TEST_CASE("planted outlier")
{
    auto rng = make_rng(4, {});
    Matrix x = fixtures::random_matrix(20, 2, rng, 0.0, 1.0);
    x.append_row(std::vector<double>{100.0, 100.0});
    const auto r = lof_scores(x, 5);
    CHECK(r.scores.back() > 10.0);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(r.scores[i] < 2.0);
    }
}

TEST_CASE("regular grid interior scores near 1")
{
    Matrix x;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            x.append_row(std::vector<double>{static_cast<double>(i), static_cast<double>(j)});
        }
    }
    const auto r = lof_scores(x, 4);
    for (int i = 2; i < 8; ++i) {
        for (int j = 2; j < 8; ++j) {
            const double s = r.scores[static_cast<std::size_t>(i * 10 + j)];
            CHECK(s >= 0.9);
            CHECK(s <= 1.1);
        }
    }
}

TEST_CASE("matches the brute-force oracle, including ties")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto rng = make_rng(seed, {7});
        const std::size_t n = 15 + seed * 5;
        const std::size_t d = 1 + seed % 5;
        Matrix x = fixtures::random_matrix(n, d, rng);
        if (seed % 3 == 0) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    x(i, j) = std::round(x(i, j) * 3.0); // coarse grid: many tied distances
                }
            }
        }
        for (std::size_t k : {3u, 5u, 10u}) {
            const auto got = lof_scores(x, k);
            const auto want = oracles::lof(x, k);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(got.scores[i] == doctest::Approx(want[i]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("scores are positive and finite; uniform median near 1")
{
    auto rng = make_rng(9, {});
    const Matrix x = fixtures::random_matrix(400, 2, rng);
    auto r = lof_scores(x, 10);
    for (const double s : r.scores) {
        CHECK(std::isfinite(s));
        CHECK(s > 0.0);
    }
    std::nth_element(r.scores.begin(), r.scores.begin() + 200, r.scores.end());
    CHECK(r.scores[200] == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("invalid k")
{
    auto rng = make_rng(1, {});
    const Matrix x = fixtures::random_matrix(5, 2, rng);
    CHECK_THROWS_AS((void)lof_scores(x, 5), InvalidArgument);
    CHECK_THROWS_AS((void)lof_scores(x, 0), InvalidArgument);
}

TEST_CASE("remove_outliers")
{
    const Matrix x(3, 1, std::vector<double>{1, 2, 3});
    const auto data = fixtures::make_dataset(x, {1, 2, 3});
    LofResult r;
    r.scores = {1.0, 1.1, 12.0};
    r.k = 1;
    CHECK(remove_outliers(data, r, std::numeric_limits<double>::infinity()) == data);
    const auto kept = remove_outliers(data, r, 1.5);
    CHECK(kept.n_rows() == 2);
    CHECK(kept.target()[1] == 2.0);
    CHECK_THROWS_AS((void)remove_outliers(data, r, 0.5), EmptyResultError);
}

TEST_CASE("default threshold flags the requested fraction")
{
    auto rng = make_rng(2, {});
    const Matrix x = fixtures::random_matrix(200, 3, rng);
    const auto r = lof_scores(x, 10, 0.05);
    CHECK(r.flagged() <= 10);
    CHECK(r.flagged() >= 9);
    CHECK(r.to_csv().rfind("row,score,flagged\n", 0) == 0);
}
