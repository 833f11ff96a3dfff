#include <doctest.h>

#include "fixtures.hpp"
#include "sagopt/csv.hpp"
#include "sagopt/error.hpp"
#include "sagopt/pipeline/config.hpp"
#include "sagopt/pipeline/pipeline.hpp"

using namespace sagopt;
using OJson = nlohmann::ordered_json;

TEST_CASE("defaults validate and round-trip through JSON")
{
    const auto c = PipelineConfig::defaults();
    CHECK_NOTHROW(c.validate());
    CHECK(c.methods.size() == 5);
    CHECK_FALSE(c.roster.empty());
    const auto back = PipelineConfig::from_json(c.to_json());
    CHECK(back.dump() == c.dump());
    CHECK(config_hash(back) == config_hash(c));

    const auto dir = fixtures::temp_dir("config_roundtrip");
    csv::write_text(dir / "c.json", c.dump());
    CHECK(PipelineConfig::load(dir / "c.json").dump() == c.dump());
}

TEST_CASE("partial documents take defaults")
{
    const auto c = PipelineConfig::from_json(OJson::parse(R"({"seed": 11, "compare": {"folds": 4}})"));
    CHECK(c.seed == 11);
    CHECK(c.cv_folds == 4);
    CHECK(c.stats_bins == PipelineConfig::defaults().stats_bins);
    CHECK(config_hash(c) != config_hash(PipelineConfig::defaults()));
}

TEST_CASE("roster entries accept a family string or an object")
{
    const auto c = PipelineConfig::from_json(OJson::parse(R"({"compare": {"roster": [
        "cart",
        {"name": "deep_gbm", "family": "gbm", "hyperparameters": {"max_depth": 8, "learning_rate": 0.05}}
    ]}})"));
    REQUIRE(c.roster.size() == 2);
    CHECK(c.roster[0].name == "cart");
    CHECK(c.roster[0].family == "cart");
    CHECK(c.roster[1].name == "deep_gbm");
    CHECK(c.roster[1].hyperparameters.at("max_depth") == "8");
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("metric names are case-insensitive")
{
    CHECK(metric_from_name("r2") == Metric::r2);
    CHECK(metric_from_name("Rmse") == Metric::rmse);
    CHECK_FALSE(metric_from_name("accuracy").has_value());
}

TEST_CASE("invalid configurations")
{
    const auto bad = [](const char* text) { return PipelineConfig::from_json(OJson::parse(text)); };
    CHECK_THROWS_AS((void)bad(R"({"sede": 1})"), ConfigError);
    CHECK_THROWS_AS((void)bad(R"({"compare": {"metric": "accuracy"}})"), ConfigError);
    CHECK_THROWS_AS((void)bad(R"({"seed": "seven"})"), ConfigError);
    CHECK_THROWS_AS((void)bad(R"({"optimize": {"methods": [{"kind": "annealing", "name": "SA"}]}})"), ConfigError);
    CHECK_THROWS_AS((void)bad(R"({"compare": {"roster": ["no_such_family"]}})").validate(), ConfigError);
    CHECK_THROWS_AS((void)bad(R"({"compare": {"roster": ["mlp"]}})").validate(), UnimplementedError);
    CHECK_THROWS_AS((void)bad(R"({"compare": {"roster": [{"family": "gbm", "hyperparameters": {"depth": 3}}]}})")
                        .validate(),
                    ConfigError);
    auto c = PipelineConfig::defaults();
    c.cv_folds = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = PipelineConfig::defaults();
    c.pinned_model = "not_in_roster";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS((void)PipelineConfig::load(fixtures::temp_dir("config_missing") / "x.json"), Error);
}
