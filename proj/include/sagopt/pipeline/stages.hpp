#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sagopt/dataset.hpp"
#include "sagopt/metrics.hpp"
#include "sagopt/models/regressor.hpp"
#include "sagopt/models/validation.hpp"
#include "sagopt/optimize/campaign.hpp"
#include "sagopt/pipeline/config.hpp"
#include "sagopt/preprocess/lof.hpp"
#include "sagopt/preprocess/rfe.hpp"
#include "sagopt/ranking.hpp"

// Building blocks shared by the pipeline and the standalone subcommands.
// Each writes its artifacts under `dir` and appends their paths, relative to
// `dir`, to `written`.
namespace sagopt::stages {

using Written = std::vector<std::string>;

// Seed streams for the stages, so enabling one stage never shifts another's draws.
inline constexpr std::uint64_t cv_stream = 0x6376;
inline constexpr std::uint64_t model_stream = 0x6d6f64;
inline constexpr std::uint64_t lof_stream = 0x6c6f66;
inline constexpr std::uint64_t rfe_stream = 0x726665;
inline constexpr std::uint64_t refit_stream = 0x726674;
inline constexpr std::uint64_t optimize_stream = 0x6f7074;

void write_artifact(const std::filesystem::path& dir, const std::string& name, std::string_view content,
                    Written& written);

// data: <stem>.csv and schema.csv
void write_dataset(const Dataset& data, const std::filesystem::path& dir, const std::string& stem, Written& written);

[[nodiscard]] Dataset load_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path);

// clean.csv, clean_report.txt, clean_report.kv
[[nodiscard]] CleanResult clean_stage(const Dataset& raw, const std::filesystem::path& dir, Written& written);

// stats.txt, stats.csv, histograms.csv
[[nodiscard]] DescriptiveStats stats_stage(const Dataset& data, std::size_t bins, const std::filesystem::path& dir,
                                           Written& written);

[[nodiscard]] RegressorSpec roster_spec(const RosterEntry& entry, std::uint64_t seed);

// compare/fold_metrics.csv, compare/summary.csv, compare/<name>.txt
[[nodiscard]] std::vector<CrossValidation> compare_stage(const Dataset& data, const std::vector<RosterEntry>& roster,
                                                         std::size_t folds, std::uint64_t seed,
                                                         const std::filesystem::path& dir, Written& written);

// Per-fold scores, folds x models. Undefined values score as the worst
// possible value for the metric direction.
[[nodiscard]] Matrix fold_scores(const std::vector<CrossValidation>& results, Metric metric);

struct FoldTable {
    std::vector<std::string> models;
    Matrix scores;
};
// Reads compare/fold_metrics.csv back into a score table.
[[nodiscard]] FoldTable read_fold_scores(const std::filesystem::path& path, Metric metric);

// rank.csv, rank.txt
[[nodiscard]] RankReport rank_stage(const std::vector<std::string>& models, const Matrix& scores, Metric metric,
                                    const std::filesystem::path& dir, Written& written);

struct LofOutcome {
    LofResult scores;
    CrossValidation without_removal;
    CrossValidation with_removal;
    double median_r2_without = 0.0;
    double median_r2_with = 0.0;
    bool applied = false;
    std::size_t removed_rows = 0;
    Dataset data; // the dataset downstream stages use
};

// lof_scores.csv, lof_comparison.csv, lof.txt
[[nodiscard]] LofOutcome lof_stage(const Dataset& data, const RegressorSpec& spec, std::size_t k,
                                   double flag_fraction, std::optional<double> threshold, double min_improvement,
                                   std::size_t folds, std::uint64_t seed, const std::filesystem::path& dir,
                                   Written& written);

struct RfeOutcome {
    SweepResult sweep;
    std::vector<std::string> selected; // at the best K, most important first
    std::vector<std::string> removed;  // schema order
};

// rfe_ranking.csv, rfe_sweep.csv, rfe_selection.csv, rfe.txt
[[nodiscard]] RfeOutcome rfe_stage(const Dataset& data, const RegressorSpec& spec, std::size_t k_min,
                                   std::size_t k_max, std::size_t folds, const RfeOptions& options,
                                   std::uint64_t seed, const std::filesystem::path& dir, Written& written);

struct TrainOutcome {
    FittedModel model;
    std::vector<double> holdout_r2;
    std::size_t chosen = 0;
};

// Fits `refits` models, each on its own seeded split, and keeps the one with
// the best held-out R² (first on ties). model.json, model_info.txt, refits.csv
[[nodiscard]] TrainOutcome train_stage(const Dataset& data, const RegressorSpec& spec, std::size_t refits,
                                       double holdout_fraction, std::uint64_t seed, const std::filesystem::path& dir,
                                       Written& written);

// Optimizer box constraints for the model's inputs, looked up by name.
[[nodiscard]] Bounds model_bounds(const FittedModel& model, const Schema& schema);

// optimize/trace_<method>.csv, optimize/envelope.csv, optimize/summary.csv,
// optimize/summary.txt, optimize/candidates.csv
[[nodiscard]] CampaignResult optimize_stage(const FittedModel& model, const Schema& schema,
                                            const std::vector<MethodSpec>& methods, std::size_t runs,
                                            std::uint64_t seed, const std::filesystem::path& dir, Written& written);

} // namespace sagopt::stages
