#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sagopt/metrics.hpp"
#include "sagopt/optimize/campaign.hpp"

namespace sagopt {

struct RosterEntry {
    std::string name; // label in tables; defaults to the family
    std::string family;
    std::map<std::string, std::string> hyperparameters;
};

struct PipelineConfig {
    std::uint64_t seed = 7;
    unsigned threads = 0; // 0 = hardware concurrency
    std::filesystem::path output_dir = "sagopt-out";

    // Data: either a CSV file plus schema file, or the synthetic generator.
    std::string data_source = "synthetic"; // "synthetic" | "csv"
    std::filesystem::path csv_path;
    std::filesystem::path schema_path;
    std::size_t synthetic_rows = 2000;
    std::uint64_t synthetic_seed = 7;
    double synthetic_noise = 30.0;

    bool clean_enabled = true;
    std::size_t stats_bins = 20;

    std::size_t cv_folds = 10;
    std::vector<RosterEntry> roster;
    Metric rank_metric = Metric::r2;
    std::string pinned_model; // roster name; empty = Friedman winner

    bool lof_enabled = true;
    std::size_t lof_k = 20;
    double lof_flag_fraction = 0.01;
    std::optional<double> lof_threshold; // overrides the fraction
    double lof_min_improvement = 0.01;   // relative median-R² gain needed to apply removal

    bool rfe_enabled = true;
    std::size_t rfe_k_min = 10;
    std::size_t rfe_k_max = 0; // 0 = all features
    std::size_t rfe_folds = 5;
    std::size_t rfe_repeats = 5;
    double rfe_holdout = 0.2;

    std::size_t best_of_refits = 5;
    double refit_holdout = 0.2;

    bool optimize_enabled = true;
    std::size_t optimize_runs = 10;
    std::vector<MethodSpec> methods;

    // Default roster and the DE/GA/PSO/URS/LHC campaign.
    [[nodiscard]] static PipelineConfig defaults();

    // Missing keys take defaults; unknown keys, unknown families and bad
    // values raise ConfigError.
    [[nodiscard]] static PipelineConfig from_json(const nlohmann::ordered_json& j);
    [[nodiscard]] nlohmann::ordered_json to_json() const;

    [[nodiscard]] static PipelineConfig load(const std::filesystem::path& path);
    [[nodiscard]] std::string dump() const;

    void validate() const;
};

[[nodiscard]] std::vector<RosterEntry> default_roster();
[[nodiscard]] std::vector<MethodSpec> default_methods();

[[nodiscard]] std::optional<Metric> metric_from_name(std::string_view name);

} // namespace sagopt
