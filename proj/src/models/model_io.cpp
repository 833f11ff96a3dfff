#include "sagopt/models/model_io.hpp"

#include <fmt/format.h>

#include "sagopt/csv.hpp"
#include "sagopt/error.hpp"
#include "sagopt/models/ensemble.hpp"
#include "sagopt/models/knn.hpp"
#include "sagopt/models/linear.hpp"

namespace sagopt {

namespace {

constexpr const char* format_tag = "sagopt-model";
constexpr int format_version = 1;

std::shared_ptr<const Regressor> regressor_from_json(const Json& j)
{
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
        return std::make_shared<const LinearModel>(j.at("intercept").get<double>(),
                                                   j.at("coef").get<std::vector<double>>());
    }
    if (kind == "knn") {
        const auto& rows = j.at("x");
        Matrix x;
        for (const auto& r : rows) {
            x.append_row(r.get<std::vector<double>>());
        }
        const auto weighting =
            j.at("weighting").get<std::string>() == "uniform" ? KnnWeighting::uniform : KnnWeighting::inverse_distance;
        return std::make_shared<const KnnModel>(std::move(x), j.at("y").get<std::vector<double>>(),
                                                j.at("k").get<std::size_t>(), weighting);
    }
    if (kind == "tree_ensemble") {
        const std::string c = j.at("combine").get<std::string>();
        Combine combine = Combine::additive;
        if (c == "average") {
            combine = Combine::average;
        } else if (c == "weighted_median") {
            combine = Combine::weighted_median;
        } else if (c != "additive") {
            throw ConfigError(fmt::format("unknown ensemble combination '{}'", c));
        }
        std::vector<Tree> trees;
        for (const auto& t : j.at("trees")) {
            const auto feature = t.at("feature").get<std::vector<int>>();
            const auto threshold = t.at("threshold").get<std::vector<double>>();
            const auto left = t.at("left").get<std::vector<int>>();
            const auto right = t.at("right").get<std::vector<int>>();
            const auto value = t.at("value").get<std::vector<double>>();
            const auto samples = t.at("samples").get<std::vector<std::size_t>>();
            const std::size_t count = feature.size();
            if (threshold.size() != count || left.size() != count || right.size() != count || value.size() != count ||
                samples.size() != count) {
                throw ConfigError("tree arrays have inconsistent lengths");
            }
            std::vector<TreeNode> nodes(count);
            for (std::size_t i = 0; i < count; ++i) {
                nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i], samples[i]};
            }
            trees.emplace_back(std::move(nodes));
        }
        return std::make_shared<const TreeEnsemble>(combine, j.at("base").get<double>(), std::move(trees),
                                                    j.at("weights").get<std::vector<double>>());
    }
    throw ConfigError(fmt::format("unknown model kind '{}'", kind));
}

} // namespace

std::string save_model(const FittedModel& model)
{
    Json hyper = Json::object();
    for (const auto& [k, v] : model.spec().hyperparameters) {
        hyper[k] = v;
    }
    Json doc{{"format", format_tag},
             {"version", format_version},
             {"family", model.spec().family},
             {"hyperparameters", std::move(hyper)},
             {"seed", model.spec().seed},
             {"feature_names", model.feature_names()},
             {"warnings", model.warnings()},
             {"internals", model.impl().to_json()}};
    return doc.dump(1) + "\n";
}

FittedModel load_model(const std::string& text)
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(fmt::format("model file is not valid JSON: {}", e.what()));
    }
    try {
        if (doc.at("format").get<std::string>() != format_tag) {
            throw ConfigError("not a model file");
        }
        if (doc.at("version").get<int>() != format_version) {
            throw ConfigError(fmt::format("unsupported model format version {}", doc.at("version").dump()));
        }
        RegressorSpec spec;
        spec.family = doc.at("family").get<std::string>();
        for (const auto& [k, v] : doc.at("hyperparameters").items()) {
            spec.hyperparameters[k] = v.get<std::string>();
        }
        spec.seed = doc.at("seed").get<std::uint64_t>();
        (void)resolve_params(spec);
        return FittedModel(spec, doc.at("feature_names").get<std::vector<std::string>>(),
                           regressor_from_json(doc.at("internals")),
                           doc.value("warnings", std::vector<std::string>{}));
    } catch (const Json::exception& e) {
        throw ConfigError(fmt::format("malformed model file: {}", e.what()));
    }
}

void save_model_file(const FittedModel& model, const std::filesystem::path& path)
{
    csv::write_text(path, save_model(model));
}

FittedModel load_model_file(const std::filesystem::path& path) { return load_model(csv::read_text(path)); }

std::string model_info(const FittedModel& model)
{
    const auto& spec = model.spec();
    std::string out = fmt::format("family: {}\n", spec.family);
    out += fmt::format("description: {}\n", family_info(spec.family).description);
    out += fmt::format("seed: {}\n", spec.seed);
    out += "hyperparameters:\n";
    const ResolvedParams resolved = resolve_params(spec);
    for (const auto& [k, v] : resolved.values()) {
        const bool overridden = spec.hyperparameters.count(k) != 0;
        out += fmt::format("  {} = {}{}\n", k, v, overridden ? "" : " (default)");
    }
    out += fmt::format("features ({}):\n", model.feature_names().size());
    for (const auto& f : model.feature_names()) {
        out += fmt::format("  {}\n", f);
    }
    out += fmt::format("internals: {}\n", model.impl().summary());
    for (const auto& w : model.warnings()) {
        out += fmt::format("warning: {}\n", w);
    }
    return out;
}

} // namespace sagopt
