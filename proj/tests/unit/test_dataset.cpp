#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "sagopt/csv.hpp"
#include "sagopt/dataset.hpp"
#include "sagopt/error.hpp"
#include "sagopt/synthetic.hpp"

using namespace sagopt;

namespace {

Schema two_feature_schema()
{
    Schema s;
    s.features = {{"a", "-", 0.0, 10.0}, {"b", "kg", -5.0, 5.0}};
    s.target = {"y", "t/h", 0.0, 100.0};
    return s;
}

} // namespace

TEST_CASE("csv helpers")
{
    CHECK(csv::split_line("a, \"b,c\" ,d") == std::vector<std::string>{"a", "b,c", "d"});
    CHECK(csv::split_line("\"say \"\"hi\"\"\"") == std::vector<std::string>{"say \"hi\""});
    CHECK(csv::parse_real("1.5e3") == 1500.0);
    CHECK_FALSE(csv::parse_real("1.5x").has_value());
    CHECK_FALSE(csv::parse_real("").has_value());
    for (const double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678}) {
        CHECK(csv::parse_real(csv::format_real(v)) == v);
    }
    CHECK(csv::escape("a,b") == "\"a,b\"");
}

TEST_CASE("load_csv reads a 3-row file against a 2-feature schema")
{
    const auto dir = fixtures::temp_dir("dataset_load");
    csv::write_text(dir / "d.csv", "b,extra,a,y\n1,x,2,3\n-1,y,4,5\n0,z,6,7\n");
    const auto data = load_csv(dir / "d.csv", two_feature_schema());
    CHECK(data.n_rows() == 3);
    CHECK(data.n_features() == 2);
    CHECK(data.features()(1, 0) == 4.0); // reordered to schema order
    CHECK(data.features()(1, 1) == -1.0);
    CHECK(data.target()[2] == 7.0);
}

TEST_CASE("load_csv errors")
{
    const auto dir = fixtures::temp_dir("dataset_errors");
    SUBCASE("missing target column")
    {
        csv::write_text(dir / "d.csv", "a,b\n1,2\n");
        CHECK_THROWS_AS((void)load_csv(dir / "d.csv", two_feature_schema()), SchemaError);
    }
    SUBCASE("bad cell cites its row")
    {
        csv::write_text(dir / "d.csv", "a,b,y\n1,1,1\n2,2,2\n3,3,3\n4,4,4\n5,abc,5\n");
        try {
            (void)load_csv(dir / "d.csv", two_feature_schema());
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.row() == 5);
            CHECK(e.column() == "b");
        }
    }
    SUBCASE("empty cell loads as NaN")
    {
        csv::write_text(dir / "d.csv", "a,b,y\n1,,1\n");
        CHECK(std::isnan(load_csv(dir / "d.csv", two_feature_schema()).features()(0, 1)));
    }
}

TEST_CASE("schema validation and round trip")
{
    auto s = two_feature_schema();
    const auto dir = fixtures::temp_dir("schema");
    write_schema(s, dir / "s.csv");
    CHECK(read_schema(dir / "s.csv") == s);

    s.features[1].name = "a";
    CHECK_THROWS_AS(s.validate(), SchemaError);
    s = two_feature_schema();
    s.features[0].lower = 11.0;
    CHECK_THROWS_AS(s.validate(), SchemaError);
}

TEST_CASE("dataset csv round trip is exact")
{
    const auto data = generate_synthetic_mill(50, 3, 30.0);
    const auto dir = fixtures::temp_dir("roundtrip");
    write_csv(data, dir / "d.csv");
    CHECK(load_csv(dir / "d.csv", data.schema()) == data);
}

TEST_CASE("clean")
{
    Matrix x(10, 2, 1.0);
    std::vector<double> y(10, 50.0);
    SUBCASE("one NaN row among 10")
    {
        x(3, 1) = std::nan("");
        const auto r = clean(Dataset(two_feature_schema(), x, y));
        CHECK(r.data.n_rows() == 9);
        CHECK(r.report.non_finite == 1);
        CHECK(r.report.removed() == 1);
    }
    SUBCASE("all rows valid is the identity")
    {
        const Dataset d(two_feature_schema(), x, y);
        const auto r = clean(d);
        CHECK(r.data == d);
        CHECK(r.report.removed() == 0);
    }
    SUBCASE("each row counted once under the first rule")
    {
        x(0, 0) = 11.0;
        y[0] = std::nan("");
        x(1, 1) = 6.0;
        y[2] = 101.0;
        const auto r = clean(Dataset(two_feature_schema(), x, y));
        CHECK(r.report.non_finite == 1);
        CHECK(r.report.feature_out_of_bounds == 1);
        CHECK(r.report.target_out_of_bounds == 1);
        CHECK(r.report.retained == 7);
    }
    SUBCASE("nothing survives")
    {
        for (std::size_t i = 0; i < 10; ++i) {
            y[i] = -1.0;
        }
        CHECK_THROWS_AS((void)clean(Dataset(two_feature_schema(), x, y)), EmptyResultError);
    }
}

TEST_CASE("clean drops a mill weight above its recorded range")
{
    auto data = generate_synthetic_mill(20, 1, 30.0);
    Matrix x = data.features();
    x(4, *data.schema().index_of("Mill weight")) = 800.0;
    const auto r = clean(Dataset(data.schema(), x, std::vector<double>(data.target().begin(), data.target().end())));
    CHECK(r.data.n_rows() == 19);
    CHECK(r.report.feature_out_of_bounds == 1);
}

TEST_CASE("kfold_split")
{
    SUBCASE("n=10, k=10 gives singleton folds")
    {
        const auto f = kfold_split(10, 10, 1);
        CHECK(f.fold_sizes() == std::vector<std::size_t>(10, 1));
    }
    SUBCASE("n=10, k=3 gives sizes {4,3,3}")
    {
        auto sizes = kfold_split(10, 3, 1).fold_sizes();
        std::sort(sizes.begin(), sizes.end());
        CHECK(sizes == std::vector<std::size_t>{3, 3, 4});
    }
    SUBCASE("deterministic and a partition")
    {
        for (std::size_t n : {7u, 50u, 101u}) {
            for (std::size_t k : {2u, 5u, 7u}) {
                const auto a = kfold_split(n, k, 42);
                CHECK(a.fold_index == kfold_split(n, k, 42).fold_index);
                const auto sizes = a.fold_sizes();
                CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
                std::multiset<std::size_t> all;
                for (std::size_t fold = 0; fold < k; ++fold) {
                    const auto test = a.test_rows(fold);
                    const auto train = a.train_rows(fold);
                    CHECK(test.size() + train.size() == n);
                    all.insert(test.begin(), test.end());
                }
                CHECK(all.size() == n);
                CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == n);
            }
        }
    }
    CHECK_THROWS_AS((void)kfold_split(3, 4, 1), InvalidArgument);
    CHECK_THROWS_AS((void)kfold_split(3, 0, 1), InvalidArgument);
}

TEST_CASE("describe")
{
    SUBCASE("hand values")
    {
        const auto c = describe_column(std::vector<double>{1, 2, 3}, 4);
        CHECK(c.min == 1.0);
        CHECK(c.max == 3.0);
        CHECK(c.mean == 2.0);
        CHECK(c.std == doctest::Approx(1.0));
    }
    SUBCASE("constant column")
    {
        const auto c = describe_column(std::vector<double>{5, 5, 5}, 10);
        CHECK(c.std == 0.0);
        CHECK(std::count_if(c.bin_counts.begin(), c.bin_counts.end(), [](std::size_t k) { return k > 0; }) == 1);
    }
    SUBCASE("[0,10] in 2 bins")
    {
        CHECK(describe_column(std::vector<double>{0, 10}, 2).bin_counts == std::vector<std::size_t>{1, 1});
    }
    SUBCASE("invariants on synthetic data")
    {
        const auto data = generate_synthetic_mill(300, 2, 30.0);
        const auto s = describe(data, 20);
        REQUIRE(s.columns.size() == data.n_features() + 1);
        CHECK(s.columns.front().name == data.target_name());
        for (const auto& c : s.columns) {
            CHECK(c.min <= c.mean);
            CHECK(c.mean <= c.max);
            CHECK(c.std >= 0.0);
            CHECK(std::accumulate(c.bin_counts.begin(), c.bin_counts.end(), std::size_t{0}) == 300);
        }
    }
}

TEST_CASE("synthetic generator")
{
    const auto a = generate_synthetic_mill(100, 7, 30.0);
    CHECK(a.n_rows() == 100);
    CHECK(a.n_features() == 20);
    CHECK(clean(a).report.removed() == 0);
    CHECK(a == generate_synthetic_mill(100, 7, 30.0));
    CHECK_FALSE(a == generate_synthetic_mill(100, 8, 30.0));

    const auto exact = generate_synthetic_mill(200, 7, 0.0);
    const MillGroundTruth truth;
    for (std::size_t i = 0; i < exact.n_rows(); ++i) {
        CHECK(exact.target()[i] == truth(exact.row(i)));
        CHECK(exact.target()[i] <= MillGroundTruth::supremum);
    }
    CHECK(truth(truth.maximizer()) == doctest::Approx(MillGroundTruth::supremum).epsilon(1e-12));

    const auto signal = MillGroundTruth::signal_features();
    const auto inert = MillGroundTruth::inert_features();
    CHECK(signal.size() == 15);
    CHECK(inert.size() == 5);
    // Inert inputs never move the truth.
    auto row = truth.maximizer();
    const double peak = truth(row);
    const auto schema = mill_schema();
    for (const auto& name : inert) {
        const auto j = *schema.index_of(name);
        row[j] = schema.features[j].upper;
        CHECK(truth(row) == peak);
    }
}
