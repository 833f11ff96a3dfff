#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sagopt/matrix.hpp"

namespace sagopt {

// One named, unit-annotated column with its admissible [lower, upper] range.
// The ranges double as the box constraints handed to the optimizers.
struct FeatureSpec {
    std::string name;
    std::string unit;
    double lower = 0.0;
    double upper = 0.0;

    bool operator==(const FeatureSpec&) const = default;
};

// Ordered input features plus the target column.
struct Schema {
    std::vector<FeatureSpec> features;
    FeatureSpec target;

    [[nodiscard]] std::vector<std::string> feature_names() const;
    [[nodiscard]] std::optional<std::size_t> index_of(const std::string& name) const;

    // Throws SchemaError on empty feature list, duplicate names or lower > upper.
    void validate() const;

    bool operator==(const Schema&) const = default;
};

// n x d feature table with a target vector. Construction validates the shape
// and the schema; finiteness and bound conformance are established by clean().
class Dataset {
public:
    Dataset(Schema schema, Matrix features, std::vector<double> target);

    [[nodiscard]] std::size_t n_rows() const noexcept { return features_.rows(); }
    [[nodiscard]] std::size_t n_features() const noexcept { return features_.cols(); }

    [[nodiscard]] const Schema& schema() const noexcept { return schema_; }
    [[nodiscard]] const std::vector<FeatureSpec>& feature_specs() const noexcept { return schema_.features; }
    [[nodiscard]] const std::string& target_name() const noexcept { return schema_.target.name; }
    [[nodiscard]] std::vector<std::string> feature_names() const { return schema_.feature_names(); }

    [[nodiscard]] const Matrix& features() const noexcept { return features_; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const { return features_.row(i); }
    [[nodiscard]] std::span<const double> target() const noexcept { return target_; }

    // Subset of rows, in the order given (duplicates allowed).
    [[nodiscard]] Dataset select_rows(std::span<const std::size_t> rows) const;

    // Subset of feature columns by name, in the order given.
    [[nodiscard]] Dataset select_features(const std::vector<std::string>& names) const;

    bool operator==(const Dataset&) const = default;

private:
    Schema schema_;
    Matrix features_;
    std::vector<double> target_;
};

// Schema file: CSV with header `name,unit,lower,upper,role`, role in {feature, target}.
[[nodiscard]] Schema read_schema(const std::filesystem::path& path);
void write_schema(const Schema& schema, const std::filesystem::path& path);

// Reads a headered CSV, picking the schema's feature columns (reordered to
// schema order) and the target column. Extra columns are ignored. Empty
// cells load as NaN; anything else that is not a real raises ParseError.
[[nodiscard]] Dataset load_csv(const std::filesystem::path& path, const Schema& schema);
void write_csv(const Dataset& data, const std::filesystem::path& path);

struct CleanReport {
    std::size_t input_rows = 0;
    std::size_t non_finite = 0;
    std::size_t feature_out_of_bounds = 0;
    std::size_t target_out_of_bounds = 0;
    std::size_t retained = 0;

    [[nodiscard]] std::size_t removed() const noexcept
    {
        return non_finite + feature_out_of_bounds + target_out_of_bounds;
    }
    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] std::string to_key_value() const;
};

struct CleanResult {
    Dataset data;
    CleanReport report;
};

// Drops rows with any non-finite value, any feature outside its bounds, or a
// target outside the target bounds. Each removed row is counted once, under
// the first rule it violates in that order. Throws EmptyResultError if no
// row survives.
[[nodiscard]] CleanResult clean(const Dataset& raw);

struct FoldAssignment {
    std::size_t k = 0;
    std::vector<std::size_t> fold_index;

    [[nodiscard]] std::vector<std::size_t> test_rows(std::size_t fold) const;
    [[nodiscard]] std::vector<std::size_t> train_rows(std::size_t fold) const;
    [[nodiscard]] std::vector<std::size_t> fold_sizes() const;
};

// Shuffled k-fold assignment; fold sizes differ by at most one.
[[nodiscard]] FoldAssignment kfold_split(std::size_t n_rows, std::size_t k, std::uint64_t seed);
[[nodiscard]] inline FoldAssignment kfold_split(const Dataset& data, std::size_t k, std::uint64_t seed)
{
    return kfold_split(data.n_rows(), k, seed);
}

struct ColumnStats {
    std::string name;
    std::string unit;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0; // sample standard deviation, 0 for a single row
    std::vector<double> bin_edges; // bins + 1 edges spanning [min, max]
    std::vector<std::size_t> bin_counts;
};

struct DescriptiveStats {
    std::vector<ColumnStats> columns; // target first, then features in schema order

    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] std::string histogram_csv() const;
};

[[nodiscard]] ColumnStats describe_column(std::span<const double> values, std::size_t bins);
[[nodiscard]] DescriptiveStats describe(const Dataset& data, std::size_t bins);

} // namespace sagopt
