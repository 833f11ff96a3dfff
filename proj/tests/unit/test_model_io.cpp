#include <doctest.h>

#include "fixtures.hpp"
#include "sagopt/error.hpp"
#include "sagopt/models/model_io.hpp"
#include "sagopt/models/regressor.hpp"

using namespace sagopt;

TEST_CASE("save then load predicts bit-identically for every implemented family")
{
    const auto data = fixtures::random_regression(150, 4, 12);
    auto rng = make_rng(7, {});
    const Matrix probe = fixtures::random_matrix(200, 4, rng, -2.0, 2.0);
    const auto dir = fixtures::temp_dir("model_io");
    for (const auto& f : family_registry()) {
        if (!f.implemented) {
            continue;
        }
        CAPTURE(f.name);
        std::map<std::string, std::string> hp;
        if (f.name == "random_forest" || f.name == "extra_trees") {
            hp["n_trees"] = "8";
        }
        const auto model = fit({f.name, hp, 21}, data);
        const auto text = save_model(model);
        const auto back = load_model(text);
        CHECK(back.spec() == model.spec());
        CHECK(back.feature_names() == model.feature_names());
        CHECK(back.predict(probe) == model.predict(probe));
        CHECK(save_model(back) == text);

        const auto path = dir / (f.name + ".json");
        save_model_file(model, path);
        CHECK(load_model_file(path).predict(probe) == model.predict(probe));
        CHECK_FALSE(model_info(model).empty());
    }
}

TEST_CASE("malformed model files are rejected")
{
    CHECK_THROWS_AS((void)load_model("not json"), Error);
    CHECK_THROWS_AS((void)load_model("{}"), Error);
    CHECK_THROWS_AS((void)load_model_file(fixtures::temp_dir("model_io_missing") / "none.json"), Error);
}
