#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "fixtures.hpp"
#include "sagopt/error.hpp"
#include "sagopt/models/ensemble.hpp"
#include "sagopt/models/regressor.hpp"
#include "sagopt/models/tree.hpp"

using namespace sagopt;

namespace {

const Tree& only_tree(const FittedModel& m)
{
    const auto* e = m.as<TreeEnsemble>();
    REQUIRE(e != nullptr);
    REQUIRE(e->trees().size() == 1);
    return e->trees()[0];
}

double sse(std::span<const double> v)
{
    double mean = 0.0;
    for (const double x : v) {
        mean += x / static_cast<double>(v.size());
    }
    double s = 0.0;
    for (const double x : v) {
        s += (x - mean) * (x - mean);
    }
    return s;
}

// Every root-to-leaf path must describe a non-empty box.
void check_paths(const Tree& t, std::size_t node, std::vector<double> lo, std::vector<double> hi)
{
    const auto& n = t.nodes()[node];
    if (n.is_leaf()) {
        CHECK(std::isfinite(n.value));
        for (std::size_t j = 0; j < lo.size(); ++j) {
            CHECK(lo[j] < hi[j]);
        }
        return;
    }
    const auto f = static_cast<std::size_t>(n.feature);
    auto left_hi = hi;
    left_hi[f] = std::min(hi[f], n.threshold);
    auto right_lo = lo;
    right_lo[f] = std::max(lo[f], n.threshold);
    check_paths(t, static_cast<std::size_t>(n.left), lo, left_hi);
    check_paths(t, static_cast<std::size_t>(n.right), right_lo, hi);
}

} // namespace

TEST_CASE("max_depth 0 is a single leaf at the mean")
{
    const auto data = fixtures::random_regression(50, 3, 1);
    const auto m = fit({"cart", {{"max_depth", "0"}}, 0}, data);
    const auto& t = only_tree(m);
    CHECK(t.nodes().size() == 1);
    double mean = 0.0;
    for (const double v : data.target()) {
        mean += v;
    }
    CHECK(t.nodes()[0].value == doctest::Approx(mean / 50.0));
}

TEST_CASE("step data splits once with zero training error")
{
    Matrix x(10, 1);
    std::vector<double> y(10);
    for (std::size_t i = 0; i < 10; ++i) {
        x(i, 0) = static_cast<double>(i);
        y[i] = i < 5 ? 0.0 : 1.0;
    }
    const auto m = fit({"cart", {{"min_samples_leaf", "1"}}, 0}, fixtures::make_dataset(x, y));
    const auto& t = only_tree(m);
    REQUIRE(t.nodes().size() == 3);
    CHECK(t.nodes()[0].threshold > 4.0);
    CHECK(t.nodes()[0].threshold <= 5.0);
    const auto pred = m.predict(x);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(pred[i] == y[i]);
    }
}

TEST_CASE("constant target never splits")
{
    auto rng = make_rng(3, {});
    const Matrix x = fixtures::random_matrix(40, 4, rng);
    const auto m = fit({"cart", {{"max_depth", "10"}}, 0}, fixtures::make_dataset(x, std::vector<double>(40, 7.0)));
    const auto& t = only_tree(m);
    CHECK(t.nodes().size() == 1);
    CHECK(t.nodes()[0].value == 7.0);
}

TEST_CASE("the root split maximizes SSE reduction over every candidate")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto data = fixtures::random_regression(60, 3, seed);
        const auto& x = data.features();
        const auto y = data.target();
        const auto m = fit({"cart", {{"max_depth", "1"}, {"min_samples_leaf", "1"}}, 0}, data);
        const auto& t = only_tree(m);
        REQUIRE(t.nodes().size() == 3);

        double best = -1.0;
        for (std::size_t f = 0; f < 3; ++f) {
            for (std::size_t i = 0; i < 60; ++i) {
                const double thr = x(i, f);
                std::vector<double> l;
                std::vector<double> r;
                for (std::size_t k = 0; k < 60; ++k) {
                    (x(k, f) <= thr ? l : r).push_back(y[k]);
                }
                if (!l.empty() && !r.empty()) {
                    best = std::max(best, sse(y) - sse(l) - sse(r));
                }
            }
        }
        const auto f = static_cast<std::size_t>(t.nodes()[0].feature);
        std::vector<double> l;
        std::vector<double> r;
        for (std::size_t k = 0; k < 60; ++k) {
            (x(k, f) <= t.nodes()[0].threshold ? l : r).push_back(y[k]);
        }
        CHECK(sse(y) - sse(l) - sse(r) == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("structural invariants")
{
    const auto data = fixtures::random_regression(300, 4, 8);
    for (const char* family : {"cart", "random_forest", "extra_trees"}) {
        const auto m = fit({family, {{"max_depth", "7"}, {"min_samples_leaf", "3"}}, 2}, data);
        const auto* e = m.as<TreeEnsemble>();
        REQUIRE(e != nullptr);
        for (const auto& t : e->trees()) {
            CHECK(t.depth() <= 7);
            check_paths(t, 0, std::vector<double>(4, -std::numeric_limits<double>::infinity()),
                        std::vector<double>(4, std::numeric_limits<double>::infinity()));
        }
    }
    // leaves respect min_samples_leaf on a CART
    const auto m = fit({"cart", {{"max_depth", "12"}, {"min_samples_leaf", "5"}}, 0}, data);
    const auto& t = only_tree(m);
    for (const auto& n : t.nodes()) {
        if (n.is_leaf()) {
            CHECK(n.samples >= 5);
        }
    }
}

TEST_CASE("training row in a pure leaf predicts the leaf mean")
{
    Matrix x(6, 1, std::vector<double>{0, 1, 2, 10, 11, 12});
    const auto m = fit({"cart", {{"min_samples_leaf", "3"}}, 0}, fixtures::make_dataset(x, {1, 1, 1, 4, 5, 6}));
    CHECK(m.predict_row(std::vector<double>{1}) == 1.0);
    CHECK(m.predict_row(std::vector<double>{11}) == doctest::Approx(5.0));
}

TEST_CASE("cost-complexity pruning")
{
    const auto data = fixtures::random_regression(200, 3, 4);
    const auto full = only_tree(fit({"cart", {{"max_depth", "8"}}, 0}, data)).leaf_count();
    const auto some = only_tree(fit({"cart", {{"max_depth", "8"}, {"ccp_alpha", "0.01"}}, 0}, data)).leaf_count();
    const auto all = only_tree(fit({"cart", {{"max_depth", "8"}, {"ccp_alpha", "1e6"}}, 0}, data)).leaf_count();
    CHECK(some <= full);
    CHECK(all == 1);
}

TEST_CASE("binning")
{
    Matrix x(6, 2, std::vector<double>{1, 0, 2, 0, 2, 0, 3, 0, 5, 0, 5, 0});
    const BinnedColumns lossless(x, 255);
    CHECK(lossless.bin_count(0) == 4);
    CHECK(lossless.bin_count(1) == 1);
    CHECK(lossless.bin(0, 1) == lossless.bin(0, 2));
    CHECK(lossless.bin(0, 0) < lossless.bin(0, 1));
    CHECK(lossless.bin_of(0, 5.0) == lossless.bin(0, 4));
    CHECK(lossless.bin_of(0, 4.0) == lossless.bin(0, 3)); // unseen values fall in the bin below
    const BinnedColumns one(x, 1);
    CHECK(one.bin_count(0) == 1);

    // deterministic edges
    auto rng = make_rng(2, {});
    const Matrix r = fixtures::random_matrix(500, 3, rng);
    const BinnedColumns a(r, 16);
    const BinnedColumns b(r, 16);
    for (std::size_t i = 0; i < 500; ++i) {
        CHECK(a.bin(1, i) == b.bin(1, i));
    }
    CHECK(a.bin_count(1) == 16);
}

TEST_CASE("tree validation")
{
    std::vector<TreeNode> bad(1);
    bad[0].value = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS((void)Tree(bad));
    std::vector<TreeNode> cyclic(3);
    cyclic[0] = TreeNode{0, 0.5, 0, 2, 0.0, 1};
    CHECK_THROWS((void)Tree(cyclic));
}
