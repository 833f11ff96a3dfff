#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sagopt {

enum class Metric { mse, rmse, mae, mape, smape, pearson_r, r2, evs, msle };

inline constexpr std::array<Metric, 9> all_metrics = {
    Metric::mse, Metric::rmse, Metric::mae, Metric::mape, Metric::smape,
    Metric::pearson_r, Metric::r2, Metric::evs, Metric::msle,
};

[[nodiscard]] std::string_view metric_name(Metric m);
[[nodiscard]] bool higher_is_better(Metric m);

// Metrics for one prediction/actual pair. Fields that are undefined for the
// input carry no value rather than a fabricated number:
//   pearson_r  - zero variance in pred or actual
//   r2, evs    - zero variance in actual
//   mape       - some actual == 0 and no epsilon guard configured
//   msle       - some pred or actual <= -1
// MAPE and SMAPE are percentages (x100).
struct MetricReport {
    double mse = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    std::optional<double> mape;
    double smape = 0.0;
    std::optional<double> pearson_r;
    std::optional<double> r2;
    std::optional<double> evs;
    std::optional<double> msle;

    [[nodiscard]] std::optional<double> get(Metric m) const;
};

struct MetricOptions {
    // When set, |actual| in the MAPE denominator is replaced by max(|actual|, epsilon).
    std::optional<double> mape_epsilon;
};

[[nodiscard]] MetricReport compute_metrics(std::span<const double> pred, std::span<const double> actual,
                                           const MetricOptions& options = {});

struct MetricStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double std = 0.0; // sample std; 0 for a single value
    std::size_t defined = 0;
};

// Order statistics of each metric over folds. A metric undefined in some
// folds is summarized over the folds where it is defined; undefined in all
// folds leaves the entry empty.
struct FoldSummary {
    std::size_t folds = 0;
    std::array<std::optional<MetricStats>, all_metrics.size()> stats;

    [[nodiscard]] const std::optional<MetricStats>& operator[](Metric m) const
    {
        return stats[static_cast<std::size_t>(m)];
    }

    // Rows Min/Max/Mean/Median/STD by metric columns, scientific notation.
    [[nodiscard]] std::string to_text(std::string_view title) const;
    [[nodiscard]] std::string to_csv(std::string_view model) const;
    [[nodiscard]] static std::string csv_header();
};

[[nodiscard]] MetricStats summarize_values(std::span<const double> values);
[[nodiscard]] FoldSummary summarize_folds(std::span<const MetricReport> reports);

// Per-fold metrics as CSV rows: model,fold,<metric columns>.
[[nodiscard]] std::string fold_metrics_csv_header();
[[nodiscard]] std::string fold_metrics_csv(std::string_view model, std::span<const MetricReport> reports);

} // namespace sagopt
