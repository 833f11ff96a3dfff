#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "sagopt/error.hpp"
#include "sagopt/random.hpp"
#include "sagopt/ranking.hpp"

using namespace sagopt;

TEST_CASE("two models, one strictly better")
{
    Matrix s(5, 2);
    for (std::size_t r = 0; r < 5; ++r) {
        s(r, 0) = 0.9 + 0.01 * static_cast<double>(r);
        s(r, 1) = 0.5;
    }
    const auto f = friedman_average_ranks(s, true);
    CHECK(f.average_rank == std::vector<double>{1.0, 2.0});
    CHECK(friedman_average_ranks(s, false).average_rank == std::vector<double>{2.0, 1.0});
}

TEST_CASE("three-model hand example with ties")
{
    const Matrix s(3, 3, std::vector<double>{3, 2, 1, 1, 2, 3, 2, 2, 2});
    CHECK(rank_row(s.row(0), true) == std::vector<double>{1, 2, 3});
    CHECK(rank_row(s.row(1), true) == std::vector<double>{3, 2, 1});
    CHECK(rank_row(s.row(2), true) == std::vector<double>{2, 2, 2});
    const auto f = friedman_average_ranks(s, true);
    CHECK(f.average_rank == std::vector<double>{2, 2, 2});
    CHECK(f.statistic == doctest::Approx(0.0));
    CHECK(f.p_value == doctest::Approx(1.0));
}

TEST_CASE("Friedman statistic against the chi-square formula")
{
    // 4 runs, 3 models, model 0 always best, 2 always worst.
    Matrix s(4, 3);
    for (std::size_t r = 0; r < 4; ++r) {
        s(r, 0) = 3;
        s(r, 1) = 2;
        s(r, 2) = 1;
    }
    const auto f = friedman_average_ranks(s, true);
    // 12N/(k(k+1)) * sum R^2 - 3N(k+1) with N=4, k=3, R = {1,2,3}
    CHECK(f.statistic == doctest::Approx(12.0 * 4 / 12.0 * 14.0 - 3.0 * 4 * 4));
    CHECK(f.p_value == doctest::Approx(std::exp(-8.0 / 2.0)));
}

TEST_CASE("average ranks sum to m(m+1)/2 and match the counting oracle")
{
    auto rng = make_rng(17, {});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 2 + trial % 7;
        const std::size_t runs = 2 + trial % 11;
        Matrix s(runs, m);
        for (std::size_t r = 0; r < runs; ++r) {
            for (std::size_t c = 0; c < m; ++c) {
                s(r, c) = trial % 3 == 0 ? std::floor(u(rng) * 3) : u(rng); // some with ties
            }
        }
        const bool hib = trial % 2 == 0;
        const auto f = friedman_average_ranks(s, hib);
        const auto want = oracles::average_ranks(s, hib);
        for (std::size_t c = 0; c < m; ++c) {
            CHECK(f.average_rank[c] == doctest::Approx(want[c]).epsilon(1e-12));
        }
        const double sum = std::accumulate(f.average_rank.begin(), f.average_rank.end(), 0.0);
        CHECK(sum == doctest::Approx(static_cast<double>(m * (m + 1)) / 2.0));
        CHECK(f.p_value >= 0.0);
        CHECK(f.p_value <= 1.0);
    }
}

TEST_CASE("insufficient data")
{
    CHECK_THROWS_AS((void)friedman_average_ranks(Matrix(1, 3), true), InvalidArgument);
    CHECK_THROWS_AS((void)friedman_average_ranks(Matrix(3, 1), true), InvalidArgument);
}

TEST_CASE("paired t-test")
{
    const std::vector<double> a{1, 2, 3, 4};
    CHECK_THROWS_AS((void)paired_t_test(a, a), DegenerateError);

    const std::vector<double> b{10 + 1e-6, 10 - 1e-6, 10 + 2e-6, 10 - 1e-6, 10};
    const std::vector<double> zero(5, 0.0);
    CHECK(paired_t_test(b, zero) < 1e-3);

    const std::vector<double> sym{-1, 1, -1, 1};
    CHECK(paired_t_test(sym, std::vector<double>(4, 0.0)) == doctest::Approx(1.0));

    // Hand value: d = {1, 2, 3}, mean 2, sd 1, t = 2*sqrt(3), df 2 -> p = 0.0742
    const std::vector<double> d{1, 2, 3};
    const std::vector<double> z3(3, 0.0);
    CHECK(paired_t_test(d, z3) == doctest::Approx(0.07417990).epsilon(1e-6));
    CHECK(paired_t_test(d, z3) == doctest::Approx(paired_t_test(z3, d)));

    const std::vector<double> constant{2, 2, 2};
    CHECK(paired_t_test(constant, z3) == 0.0);
}

TEST_CASE("rank report")
{
    const Matrix s(3, 3, std::vector<double>{0.9, 0.5, 0.7, 0.8, 0.4, 0.75, 0.95, 0.6, 0.7});
    const auto r = rank_models({"a", "b", "c"}, s, true);
    CHECK(r.best == 0);
    CHECK_FALSE(r.pairwise_p[0].has_value());
    REQUIRE(r.pairwise_p[1].has_value());
    CHECK(*r.pairwise_p[1] >= 0.0);
    CHECK(*r.pairwise_p[1] <= 1.0);
    CHECK(r.to_text().find("Average rank") != std::string::npos);
    CHECK(r.to_csv().rfind("model,average_rank,p_value_vs_best,is_best,friedman_statistic,friedman_p_value\n", 0) == 0);
}
