#include "sagopt/pipeline/stages.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "sagopt/csv.hpp"
#include "sagopt/error.hpp"
#include "sagopt/models/model_io.hpp"
#include "sagopt/parallel.hpp"
#include "sagopt/random.hpp"
#include "sagopt/stats.hpp"

namespace sagopt::stages {

namespace fs = std::filesystem;

namespace {

std::string file_stem_for(const std::string& name)
{
    std::string out;
    for (const char c : name) {
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
    }
    return out.empty() ? "_" : out;
}

double median_r2(const FoldSummary& s)
{
    const auto& r2 = s[Metric::r2];
    return r2 ? r2->median : -std::numeric_limits<double>::infinity();
}

std::string join_names(const std::vector<std::string>& names)
{
    std::string out;
    for (const auto& n : names) {
        out += (out.empty() ? "" : ", ") + n;
    }
    return out.empty() ? "(none)" : out;
}

} // namespace

void write_artifact(const fs::path& dir, const std::string& name, std::string_view content, Written& written)
{
    const fs::path path = dir / name;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    csv::write_text(path, content);
    written.push_back(fs::path(name).generic_string());
}

void write_dataset(const Dataset& data, const fs::path& dir, const std::string& stem, Written& written)
{
    fs::create_directories(dir);
    write_schema(data.schema(), dir / "schema.csv");
    written.emplace_back("schema.csv");
    write_csv(data, dir / (stem + ".csv"));
    written.push_back(stem + ".csv");
}

Dataset load_dataset(const fs::path& csv_path, const fs::path& schema_path)
{
    return load_csv(csv_path, read_schema(schema_path));
}

CleanResult clean_stage(const Dataset& raw, const fs::path& dir, Written& written)
{
    auto result = clean(raw);
    fs::create_directories(dir);
    write_csv(result.data, dir / "clean.csv");
    written.emplace_back("clean.csv");
    write_artifact(dir, "clean_report.txt", result.report.to_text(), written);
    write_artifact(dir, "clean_report.kv", result.report.to_key_value(), written);
    return result;
}

DescriptiveStats stats_stage(const Dataset& data, std::size_t bins, const fs::path& dir, Written& written)
{
    auto stats = describe(data, bins);
    write_artifact(dir, "stats.txt", stats.to_text(), written);
    write_artifact(dir, "stats.csv", stats.to_csv(), written);
    write_artifact(dir, "histograms.csv", stats.histogram_csv(), written);
    return stats;
}

RegressorSpec roster_spec(const RosterEntry& entry, std::uint64_t seed)
{
    return RegressorSpec{entry.family, entry.hyperparameters, derive_seed(seed, {model_stream})};
}

std::vector<CrossValidation> compare_stage(const Dataset& data, const std::vector<RosterEntry>& roster,
                                           std::size_t folds, std::uint64_t seed, const fs::path& dir,
                                           Written& written)
{
    std::vector<std::pair<std::string, RegressorSpec>> specs;
    for (const auto& e : roster) {
        specs.emplace_back(e.name, roster_spec(e, seed));
    }
    const auto assignment = kfold_split(data, folds, derive_seed(seed, {cv_stream}));
    auto results = compare_models(specs, data, assignment);

    std::string fold_csv = fold_metrics_csv_header();
    std::string summary_csv = FoldSummary::csv_header();
    for (const auto& r : results) {
        fold_csv += fold_metrics_csv(r.label, r.folds);
        summary_csv += r.summary.to_csv(r.label);
    }
    write_artifact(dir, "compare/fold_metrics.csv", fold_csv, written);
    write_artifact(dir, "compare/summary.csv", summary_csv, written);
    for (const auto& r : results) {
        std::string text = r.summary.to_text(r.label);
        for (const auto& w : r.warnings) {
            text += "warning: " + w + "\n";
        }
        write_artifact(dir, "compare/" + file_stem_for(r.label) + ".txt", text, written);
    }
    return results;
}

Matrix fold_scores(const std::vector<CrossValidation>& results, Metric metric)
{
    if (results.empty()) {
        throw InvalidArgument("no cross-validation results to score");
    }
    const double worst = higher_is_better(metric) ? -std::numeric_limits<double>::infinity()
                                                  : std::numeric_limits<double>::infinity();
    const std::size_t folds = results.front().folds.size();
    Matrix scores(folds, results.size());
    for (std::size_t m = 0; m < results.size(); ++m) {
        if (results[m].folds.size() != folds) {
            throw DimensionError("models were scored on different fold counts");
        }
        for (std::size_t f = 0; f < folds; ++f) {
            scores(f, m) = results[m].folds[f].get(metric).value_or(worst);
        }
    }
    return scores;
}

FoldTable read_fold_scores(const fs::path& path, Metric metric)
{
    const std::string text = csv::read_text(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto end = text.find('\n', start);
        auto line = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            lines.push_back(std::move(line));
        }
        if (end == std::string::npos) {
            break;
        }
        start = end + 1;
    }
    if (lines.empty()) {
        throw SchemaError(fmt::format("{}: empty fold metrics file", path.string()));
    }
    const auto header = csv::split_line(lines.front());
    const auto col = std::find(header.begin(), header.end(), std::string(metric_name(metric)));
    if (header.size() < 2 || header[0] != "model" || col == header.end()) {
        throw SchemaError(fmt::format("{}: expected columns model,fold,...,{}", path.string(), metric_name(metric)));
    }
    const auto c = static_cast<std::size_t>(col - header.begin());
    const double worst = higher_is_better(metric) ? -std::numeric_limits<double>::infinity()
                                                  : std::numeric_limits<double>::infinity();
    FoldTable table;
    std::vector<std::vector<double>> per_model;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = csv::split_line(lines[i]);
        if (fields.size() != header.size()) {
            throw ParseError(i, header[0], fmt::format("{}: row {} has {} fields, expected {}", path.string(), i,
                                                       fields.size(), header.size()));
        }
        auto it = std::find(table.models.begin(), table.models.end(), fields[0]);
        if (it == table.models.end()) {
            table.models.push_back(fields[0]);
            per_model.emplace_back();
            it = table.models.end() - 1;
        }
        double v = worst;
        if (!fields[c].empty()) {
            const auto parsed = csv::parse_real(fields[c]);
            if (!parsed) {
                throw ParseError(i, header[c], fmt::format("{}: '{}' is not a number", path.string(), fields[c]));
            }
            v = *parsed;
        }
        per_model[static_cast<std::size_t>(it - table.models.begin())].push_back(v);
    }
    const std::size_t folds = per_model.front().size();
    table.scores = Matrix(folds, table.models.size());
    for (std::size_t m = 0; m < per_model.size(); ++m) {
        if (per_model[m].size() != folds) {
            throw DimensionError(fmt::format("{}: model '{}' has {} folds, expected {}", path.string(),
                                             table.models[m], per_model[m].size(), folds));
        }
        for (std::size_t f = 0; f < folds; ++f) {
            table.scores(f, m) = per_model[m][f];
        }
    }
    return table;
}

RankReport rank_stage(const std::vector<std::string>& models, const Matrix& scores, Metric metric, const fs::path& dir,
                      Written& written)
{
    auto report = rank_models(models, scores, higher_is_better(metric));
    write_artifact(dir, "rank.csv", report.to_csv(), written);
    write_artifact(dir, "rank.txt", report.to_text(), written);
    return report;
}

LofOutcome lof_stage(const Dataset& data, const RegressorSpec& spec, std::size_t k, double flag_fraction,
                     std::optional<double> threshold, double min_improvement, std::size_t folds, std::uint64_t seed,
                     const fs::path& dir, Written& written)
{
    auto scores = lof_scores(data, k, flag_fraction);
    const double cut = threshold.value_or(scores.threshold);
    scores.threshold = cut;
    Dataset filtered = remove_outliers(data, scores, cut);

    // Same fold seed as the comparison stage, so the no-removal row matches it.
    const std::uint64_t fold_seed = derive_seed(seed, {cv_stream});
    auto without = cross_validate(spec, data, kfold_split(data, folds, fold_seed));
    without.label = "without_removal";
    auto with = cross_validate(spec, filtered, kfold_split(filtered, folds, fold_seed));
    with.label = "with_removal";

    const double m0 = median_r2(without.summary);
    const double m1 = median_r2(with.summary);
    const std::size_t removed = data.n_rows() - filtered.n_rows();
    const bool applied = removed > 0 && std::isfinite(m0) && m1 > m0 + min_improvement * std::abs(m0);

    write_artifact(dir, "lof_scores.csv", scores.to_csv(), written);
    write_artifact(dir, "lof_comparison.csv",
                   FoldSummary::csv_header() + without.summary.to_csv(without.label) +
                       with.summary.to_csv(with.label),
                   written);
    std::string text = without.summary.to_text("Without outlier removal");
    text += "\n" + with.summary.to_text("With outlier removal");
    text += fmt::format("\nLOF k: {}\nThreshold: {}\nRows flagged: {} of {}\nMedian R2 without removal: {:.6f}\n"
                        "Median R2 with removal: {:.6f}\nRequired relative gain: {:.4f}\nRemoval applied: {}\n",
                        k, csv::format_real(cut), removed, data.n_rows(), m0, m1, min_improvement,
                        applied ? "yes" : "no");
    write_artifact(dir, "lof.txt", text, written);
    write_artifact(dir, "lof_decision.kv",
                   fmt::format("threshold={}\nflagged={}\nrows={}\nmedian_r2_without={}\nmedian_r2_with={}\n"
                               "min_improvement={}\napplied={}\n",
                               csv::format_real(cut), removed, data.n_rows(), csv::format_real(m0),
                               csv::format_real(m1), csv::format_real(min_improvement), applied ? 1 : 0),
                   written);

    LofOutcome out{std::move(scores), std::move(without), std::move(with), m0, m1, applied, removed,
                   applied ? std::move(filtered) : data};
    return out;
}

RfeOutcome rfe_stage(const Dataset& data, const RegressorSpec& spec, std::size_t k_min, std::size_t k_max,
                     std::size_t folds, const RfeOptions& options, std::uint64_t seed, const fs::path& dir,
                     Written& written)
{
    const std::size_t d = data.n_features();
    const std::size_t hi = k_max == 0 ? d : std::min(k_max, d);
    const std::size_t lo = std::min(k_min, hi);
    RfeOutcome out;
    out.sweep = rfe_sweep(data, spec, lo, hi, folds, derive_seed(seed, {rfe_stream}), options);
    const std::size_t best = out.sweep.best_k();
    for (const auto& p : out.sweep.points) {
        if (p.k == best) {
            out.selected = p.features;
        }
    }
    std::string selection = "feature,status\n";
    for (const auto& name : data.feature_names()) {
        const bool kept = std::find(out.selected.begin(), out.selected.end(), name) != out.selected.end();
        if (!kept) {
            out.removed.push_back(name);
        }
        selection += csv::join({name, kept ? "selected" : "removed"}) + "\n";
    }
    write_artifact(dir, "rfe_ranking.csv", out.sweep.elimination.to_csv(), written);
    write_artifact(dir, "rfe_sweep.csv", out.sweep.to_csv(), written);
    write_artifact(dir, "rfe_selection.csv", selection, written);

    std::string text = fmt::format("{:>4} {:>12} {:>12}\n", "K", "Mean R2", "Median R2");
    for (const auto& p : out.sweep.points) {
        text += fmt::format("{:>4} {:>12.6f} {:>12.6f}{}\n", p.k, p.mean_r2, p.median_r2, p.k == best ? "  *" : "");
    }
    text += fmt::format("\nBest K: {}\nSelected features ({}): {}\nRemoved features ({}): {}\n", best,
                        out.selected.size(), join_names(out.selected), out.removed.size(), join_names(out.removed));
    write_artifact(dir, "rfe.txt", text, written);
    return out;
}

TrainOutcome train_stage(const Dataset& data, const RegressorSpec& spec, std::size_t refits, double holdout_fraction,
                         std::uint64_t seed, const fs::path& dir, Written& written)
{
    if (refits < 1) {
        throw InvalidArgument("at least one refit is required");
    }
    const std::size_t n = data.n_rows();
    const auto n_hold = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(n)));
    if (n_hold < 2 || n_hold >= n) {
        throw InvalidArgument(fmt::format("holdout of {} rows out of {} leaves no usable split", n_hold, n));
    }
    std::vector<std::optional<FittedModel>> models(refits);
    std::vector<double> r2(refits);
    std::vector<std::uint64_t> seeds(refits);
    parallel_for(refits, [&](std::size_t r) {
        auto rng = make_rng(seed, {refit_stream, r});
        auto perm = random_permutation(n, rng);
        std::vector<std::size_t> hold(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_hold));
        std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_hold), perm.end());
        std::sort(hold.begin(), hold.end());
        std::sort(train.begin(), train.end());
        RegressorSpec s = spec;
        s.seed = derive_seed(spec.seed, {r});
        seeds[r] = s.seed;
        const auto test = data.select_rows(hold);
        models[r] = fit(s, data.select_rows(train));
        r2[r] = holdout_r2(models[r]->predict(test.features()), test.target());
    });
    const auto chosen = static_cast<std::size_t>(std::max_element(r2.begin(), r2.end()) - r2.begin());

    std::string csv_text = "refit,seed,holdout_r2,chosen\n";
    for (std::size_t r = 0; r < refits; ++r) {
        csv_text += csv::join({std::to_string(r), std::to_string(seeds[r]), csv::format_real(r2[r]),
                               r == chosen ? "1" : "0"}) +
                    "\n";
    }
    write_artifact(dir, "model.json", save_model(*models[chosen]), written);
    write_artifact(dir, "model_info.txt",
                   model_info(*models[chosen]) +
                       fmt::format("Chosen refit: {} of {} (held-out R2 {:.6f})\n", chosen + 1, refits, r2[chosen]),
                   written);
    write_artifact(dir, "refits.csv", csv_text, written);
    return TrainOutcome{std::move(*models[chosen]), std::move(r2), chosen};
}

Bounds model_bounds(const FittedModel& model, const Schema& schema)
{
    std::vector<FeatureSpec> specs;
    for (const auto& name : model.feature_names()) {
        const auto i = schema.index_of(name);
        if (!i) {
            throw SchemaError(fmt::format("model feature '{}' is not in the schema", name));
        }
        specs.push_back(schema.features[*i]);
    }
    return Bounds::from_features(specs);
}

CampaignResult optimize_stage(const FittedModel& model, const Schema& schema, const std::vector<MethodSpec>& methods,
                              std::size_t runs, std::uint64_t seed, const fs::path& dir, Written& written)
{
    const Bounds bounds = model_bounds(model, schema);
    const Objective objective = [&model](std::span<const double> x) { return model.predict_row(x); };
    auto result = run_campaign(objective, bounds, methods, runs, derive_seed(seed, {optimize_stream}));

    for (std::size_t m = 0; m < result.methods.size(); ++m) {
        write_artifact(dir, "optimize/trace_" + file_stem_for(result.methods[m].name) + ".csv", result.trace_csv(m),
                       written);
    }
    write_artifact(dir, "optimize/envelope.csv", result.envelope_csv(), written);
    write_artifact(dir, "optimize/summary.csv", result.summary_csv(), written);
    const auto& best = result.methods[result.best_method];
    write_artifact(dir, "optimize/summary.txt",
                   result.summary_text() +
                       fmt::format("\nBest method (highest median final best): {}\n"
                                   "Candidates: final population of run {} ({} solutions)\n",
                                   best.name, result.best_run, result.candidates.size()),
                   written);
    write_artifact(dir, "optimize/candidates.csv", result.candidates_csv(model.feature_names(), schema.target.name),
                   written);
    return result;
}

} // namespace sagopt::stages
