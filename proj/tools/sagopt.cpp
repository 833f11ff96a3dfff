#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "sagopt/csv.hpp"
#include "sagopt/error.hpp"
#include "sagopt/models/model_io.hpp"
#include "sagopt/models/params.hpp"
#include "sagopt/parallel.hpp"
#include "sagopt/pipeline/config.hpp"
#include "sagopt/pipeline/pipeline.hpp"
#include "sagopt/pipeline/stages.hpp"
#include "sagopt/synthetic.hpp"
#include "sagopt/version.hpp"

namespace fs = std::filesystem;
using namespace sagopt;
using Json = nlohmann::ordered_json;

namespace {

struct Globals {
    std::uint64_t seed = 7;
    bool seed_given = false;
    unsigned threads = 0;
};

// Input data shared by most stage subcommands.
struct DataArgs {
    std::string data;
    std::string schema;
};

void add_data_options(CLI::App* cmd, DataArgs& a)
{
    cmd->add_option("--data", a.data, "Data CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--schema", a.schema, "Schema CSV (name,unit,lower,upper,role)")
        ->required()
        ->check(CLI::ExistingFile);
}

std::map<std::string, std::string> parse_params(const std::vector<std::string>& items)
{
    std::map<std::string, std::string> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError(fmt::format("expected key=value, got '{}'", item));
        }
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

void print_written(const fs::path& dir, const stages::Written& written)
{
    for (const auto& w : written) {
        std::cout << (dir / w).string() << '\n';
    }
}

// Applies "a.b.c=value" to a JSON document. The value is read as JSON when
// it parses, otherwise as a string.
void apply_override(Json& j, const std::string& item)
{
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError(fmt::format("expected key=value, got '{}'", item));
    }
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        value = text;
    }
    Json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (dot == std::string::npos) {
            (*node)[part] = value;
            break;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

std::vector<RosterEntry> roster_from(const std::vector<std::string>& models, const std::string& config_path)
{
    if (!config_path.empty()) {
        return PipelineConfig::load(config_path).roster;
    }
    if (models.empty()) {
        return default_roster();
    }
    std::vector<RosterEntry> roster;
    for (const auto& m : models) {
        const auto eq = m.find('=');
        RosterEntry e;
        e.name = eq == std::string::npos ? m : m.substr(0, eq);
        e.family = eq == std::string::npos ? m : m.substr(eq + 1);
        (void)family_info(e.family);
        roster.push_back(e);
    }
    return roster;
}

std::string families_text()
{
    std::string out;
    for (const auto& f : family_registry()) {
        out += fmt::format("{}{}\n  {}\n", f.name, f.implemented ? "" : "  (not implemented)", f.description);
        for (const auto& p : f.params) {
            out += fmt::format("    {} = {}  {}\n", p.key, p.default_value, p.help);
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Surrogate-assisted throughput modelling and optimization toolkit"};
    app.set_version_flag("--version", std::string(toolkit_version));
    app.require_subcommand(1);

    Globals g;
    app.add_option("--seed", g.seed, "Master seed")->each([&](const std::string&) { g.seed_given = true; });
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");

    std::string out_dir = ".";
    const auto add_out = [&](CLI::App* cmd) { cmd->add_option("--out", out_dir, "Output directory"); };

    // synth
    auto* synth = app.add_subcommand("synth", "Generate synthetic mill records");
    std::size_t synth_rows = 2000;
    double synth_noise = 30.0;
    synth->add_option("--rows", synth_rows, "Number of rows")->check(CLI::PositiveNumber);
    synth->add_option("--noise", synth_noise, "Target noise standard deviation")->check(CLI::NonNegativeNumber);
    add_out(synth);

    DataArgs data_args;

    auto* stats = app.add_subcommand("stats", "Descriptive statistics and histograms");
    std::size_t bins = 20;
    add_data_options(stats, data_args);
    stats->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
    add_out(stats);

    auto* clean_cmd = app.add_subcommand("clean", "Drop non-finite and out-of-range rows");
    add_data_options(clean_cmd, data_args);
    add_out(clean_cmd);

    auto* compare = app.add_subcommand("compare", "Cross-validate a model roster");
    std::vector<std::string> models;
    std::string roster_config;
    std::size_t folds = 10;
    add_data_options(compare, data_args);
    compare->add_option("--models", models, "Roster entries: family or name=family (default: all implemented)")
        ->delimiter(',');
    compare->add_option("--config", roster_config, "Take the roster from a pipeline config")
        ->check(CLI::ExistingFile);
    compare->add_option("--folds", folds, "CV folds")->check(CLI::Range(2, 1000000));
    add_out(compare);

    auto* rank = app.add_subcommand("rank", "Average ranks and paired t-tests from fold metrics");
    std::string fold_metrics;
    std::string metric_text = "R2";
    rank->add_option("--fold-metrics", fold_metrics, "compare/fold_metrics.csv")->required()->check(CLI::ExistingFile);
    rank->add_option("--metric", metric_text, "Ranking metric");
    add_out(rank);

    // Options for the stages that train one family.
    std::string family = "regularized_gbm";
    std::vector<std::string> params;
    const auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("--model", family, "Regressor family");
        cmd->add_option("--param", params, "Hyperparameter key=value (repeatable)");
    };

    auto* lof = app.add_subcommand("lof", "Local outlier factor study");
    std::size_t lof_k = 20;
    double lof_fraction = 0.01;
    std::optional<double> lof_threshold;
    double min_improvement = 0.01;
    add_data_options(lof, data_args);
    add_model(lof);
    lof->add_option("--k", lof_k, "Neighbourhood size")->check(CLI::PositiveNumber);
    lof->add_option("--fraction", lof_fraction, "Share of rows to flag")->check(CLI::Range(0.0, 1.0));
    lof->add_option("--threshold", lof_threshold, "Explicit score threshold");
    lof->add_option("--min-improvement", min_improvement, "Relative median R2 gain needed to remove outliers");
    lof->add_option("--folds", folds, "CV folds")->check(CLI::Range(2, 1000000));
    add_out(lof);

    auto* rfe_cmd = app.add_subcommand("rfe", "Recursive feature elimination sweep");
    std::size_t k_min = 10;
    std::size_t k_max = 0;
    std::size_t rfe_folds = 5;
    RfeOptions rfe_options;
    add_data_options(rfe_cmd, data_args);
    add_model(rfe_cmd);
    rfe_cmd->add_option("--k-min", k_min, "Smallest feature count")->check(CLI::PositiveNumber);
    rfe_cmd->add_option("--k-max", k_max, "Largest feature count (0 = all)");
    rfe_cmd->add_option("--folds", rfe_folds, "CV folds per K")->check(CLI::Range(2, 1000000));
    rfe_cmd->add_option("--repeats", rfe_options.repeats, "Permutations per feature")->check(CLI::PositiveNumber);
    rfe_cmd->add_option("--holdout", rfe_options.holdout_fraction, "Importance holdout share")
        ->check(CLI::Range(0.0, 1.0));
    add_out(rfe_cmd);

    auto* train = app.add_subcommand("train", "Fit the final model with best-of-refits selection");
    std::vector<std::string> features;
    std::string selection;
    std::size_t refits = 5;
    double holdout = 0.2;
    add_data_options(train, data_args);
    add_model(train);
    train->add_option("--features", features, "Feature subset")->delimiter(',');
    train->add_option("--selection", selection, "rfe_selection.csv from the rfe stage")->check(CLI::ExistingFile);
    train->add_option("--refits", refits, "Refits to choose from")->check(CLI::PositiveNumber);
    train->add_option("--holdout", holdout, "Held-out share per refit")->check(CLI::Range(0.0, 1.0));
    add_out(train);

    auto* optimize = app.add_subcommand("optimize", "Optimize a trained surrogate and compare with samplers");
    std::string model_path;
    std::string schema_path;
    std::string methods_config;
    std::vector<std::string> method_names;
    std::size_t runs = 10;
    optimize->add_option("--model", model_path, "model.json")->required()->check(CLI::ExistingFile);
    optimize->add_option("--schema", schema_path, "Schema CSV with the feature bounds")
        ->required()
        ->check(CLI::ExistingFile);
    optimize->add_option("--config", methods_config, "Take the methods from a pipeline config")
        ->check(CLI::ExistingFile);
    optimize->add_option("--methods", method_names, "Subset of the configured methods by name")->delimiter(',');
    optimize->add_option("--runs", runs, "Independent runs per method")->check(CLI::PositiveNumber);
    add_out(optimize);

    auto* report = app.add_subcommand("report", "Write report.txt from a run manifest");
    std::string manifest_path;
    report->add_option("--manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);

    auto* pipeline = app.add_subcommand("pipeline", "Run every stage from a config file");
    std::string config_path;
    std::vector<std::string> overrides;
    std::string pipeline_out;
    pipeline->add_option("--config", config_path, "Pipeline config (JSON); defaults when omitted")
        ->check(CLI::ExistingFile);
    pipeline->add_option("--set", overrides, "Override a config key, e.g. lof.enabled=false (repeatable)");
    pipeline->add_option("--out", pipeline_out, "Output directory (overrides output_dir)");

    auto* show_config = app.add_subcommand("config", "Print the effective pipeline config");
    show_config->add_option("--config", config_path, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    show_config->add_option("--set", overrides, "Override a config key (repeatable)");

    auto* info = app.add_subcommand("model-info", "Describe a saved model");
    info->add_option("--model", model_path, "model.json")->required()->check(CLI::ExistingFile);

    app.add_subcommand("families", "List regressor families and their hyperparameters");

    CLI11_PARSE(app, argc, argv);

    CLI::App* cmd = app.get_subcommands().front();
    const std::string stage = cmd->get_name();
    try {
        if (g.threads != 0) {
            set_thread_count(g.threads);
        }
        const fs::path out = out_dir;
        stages::Written written;
        const auto spec = [&] { return RegressorSpec{family, parse_params(params), g.seed}; };
        const auto load_data = [&] { return stages::load_dataset(data_args.data, data_args.schema); };

        if (cmd == synth) {
            stages::write_dataset(generate_synthetic_mill(synth_rows, g.seed, synth_noise), out, "data", written);
            print_written(out, written);
        } else if (cmd == stats) {
            (void)stages::stats_stage(load_data(), bins, out, written);
            print_written(out, written);
        } else if (cmd == clean_cmd) {
            const auto r = stages::clean_stage(load_data(), out, written);
            std::cout << r.report.to_text();
            print_written(out, written);
        } else if (cmd == compare) {
            const auto roster = roster_from(models, roster_config);
            const auto results = stages::compare_stage(load_data(), roster, folds, g.seed, out, written);
            for (const auto& r : results) {
                std::cout << r.summary.to_text(r.label) << '\n';
            }
            print_written(out, written);
        } else if (cmd == rank) {
            const auto metric = metric_from_name(metric_text);
            if (!metric) {
                throw ConfigError(fmt::format("unknown metric '{}'", metric_text));
            }
            const auto table = stages::read_fold_scores(fold_metrics, *metric);
            std::cout << stages::rank_stage(table.models, table.scores, *metric, out, written).to_text();
            print_written(out, written);
        } else if (cmd == lof) {
            const auto r = stages::lof_stage(load_data(), spec(), lof_k, lof_fraction, lof_threshold, min_improvement,
                                             folds, g.seed, out, written);
            write_csv(r.data, out / "lof_data.csv");
            written.emplace_back("lof_data.csv");
            std::cout << csv::read_text(out / "lof.txt");
            print_written(out, written);
        } else if (cmd == rfe_cmd) {
            (void)stages::rfe_stage(load_data(), spec(), k_min, k_max, rfe_folds, rfe_options, g.seed, out, written);
            std::cout << csv::read_text(out / "rfe.txt");
            print_written(out, written);
        } else if (cmd == train) {
            Dataset data = load_data();
            if (!selection.empty()) {
                features.clear();
                const auto text = csv::read_text(selection);
                std::size_t start = text.find('\n') + 1;
                while (start < text.size()) {
                    auto end = text.find('\n', start);
                    end = end == std::string::npos ? text.size() : end;
                    const auto f = csv::split_line(std::string_view(text).substr(start, end - start));
                    if (f.size() == 2 && f[1] == "selected") {
                        features.push_back(f[0]);
                    }
                    start = end + 1;
                }
            }
            if (!features.empty()) {
                data = data.select_features(features);
            }
            const auto r = stages::train_stage(data, spec(), refits, holdout, g.seed, out, written);
            std::cout << model_info(r.model);
            print_written(out, written);
        } else if (cmd == optimize) {
            auto methods = methods_config.empty() ? default_methods() : PipelineConfig::load(methods_config).methods;
            if (!method_names.empty()) {
                std::vector<MethodSpec> picked;
                for (const auto& name : method_names) {
                    const auto it = std::find_if(methods.begin(), methods.end(),
                                                 [&](const MethodSpec& m) { return m.name == name; });
                    if (it == methods.end()) {
                        throw ConfigError(fmt::format("no method named '{}'", name));
                    }
                    picked.push_back(*it);
                }
                methods = picked;
            }
            const auto model = load_model_file(model_path);
            (void)stages::optimize_stage(model, read_schema(schema_path), methods, runs, g.seed, out, written);
            std::cout << csv::read_text(out / "optimize/summary.txt");
            print_written(out, written);
        } else if (cmd == report) {
            std::cout << emit_report(RunManifest::load(manifest_path)).string() << '\n';
        } else if (cmd == pipeline || cmd == show_config) {
            Json j = config_path.empty() ? PipelineConfig::defaults().to_json()
                                         : Json::parse(csv::read_text(config_path));
            for (const auto& o : overrides) {
                apply_override(j, o);
            }
            if (g.seed_given) {
                j["seed"] = g.seed;
            }
            if (g.threads != 0) {
                j["threads"] = g.threads;
            }
            if (!pipeline_out.empty()) {
                j["output_dir"] = pipeline_out;
            }
            const auto config = PipelineConfig::from_json(j);
            if (cmd == show_config) {
                std::cout << config.dump();
            } else {
                const auto manifest = run_pipeline(config);
                std::cout << (manifest.output_dir / "report.txt").string() << '\n';
            }
        } else if (cmd == info) {
            std::cout << model_info(load_model_file(model_path));
        } else {
            std::cout << families_text();
        }
    } catch (const StageError& e) {
        std::cerr << fmt::format("error [{}]: {}\n", e.stage(), e.cause());
        return 1;
    } catch (const Json::exception& e) {
        std::cerr << fmt::format("error [{}]: malformed JSON: {}\n", stage, e.what());
        return 1;
    } catch (const std::exception& e) {
        std::cerr << fmt::format("error [{}]: {}\n", stage, e.what());
        return 1;
    }
    return 0;
}
