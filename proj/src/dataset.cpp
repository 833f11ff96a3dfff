#include "sagopt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "sagopt/csv.hpp"
#include "sagopt/random.hpp"

namespace sagopt {

std::vector<std::string> Schema::feature_names() const
{
    std::vector<std::string> names;
    names.reserve(features.size());
    for (const auto& f : features) {
        names.push_back(f.name);
    }
    return names;
}

std::optional<std::size_t> Schema::index_of(const std::string& name) const
{
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

void Schema::validate() const
{
    if (features.empty()) {
        throw SchemaError("schema has no features");
    }
    std::set<std::string> seen;
    auto check = [&](const FeatureSpec& f) {
        if (f.name.empty()) {
            throw SchemaError("schema column with empty name");
        }
        if (!seen.insert(f.name).second) {
            throw SchemaError("duplicate column name in schema: " + f.name);
        }
        if (!(f.lower <= f.upper)) {
            throw SchemaError(fmt::format("column '{}' has lower bound {} above upper bound {}", f.name, f.lower, f.upper));
        }
    };
    for (const auto& f : features) {
        check(f);
    }
    check(target);
}

Dataset::Dataset(Schema schema, Matrix features, std::vector<double> target)
    : schema_(std::move(schema)), features_(std::move(features)), target_(std::move(target))
{
    schema_.validate();
    if (features_.rows() == 0) {
        throw EmptyResultError("dataset has no rows");
    }
    if (features_.cols() != schema_.features.size()) {
        throw DimensionError(fmt::format("feature matrix has {} columns, schema has {}", features_.cols(), schema_.features.size()));
    }
    if (target_.size() != features_.rows()) {
        throw DimensionError(fmt::format("target has {} values for {} rows", target_.size(), features_.rows()));
    }
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const
{
    Matrix out(rows.size(), n_features());
    std::vector<double> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= n_rows()) {
            throw InvalidArgument("row index out of range");
        }
        const auto src = row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
        y[i] = target_[rows[i]];
    }
    return {schema_, std::move(out), std::move(y)};
}

Dataset Dataset::select_features(const std::vector<std::string>& names) const
{
    std::vector<std::size_t> cols;
    Schema sub;
    sub.target = schema_.target;
    for (const auto& name : names) {
        const auto idx = schema_.index_of(name);
        if (!idx) {
            throw SchemaError("unknown feature: " + name);
        }
        cols.push_back(*idx);
        sub.features.push_back(schema_.features[*idx]);
    }
    Matrix out(n_rows(), cols.size());
    for (std::size_t r = 0; r < n_rows(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            out(r, c) = features_(r, cols[c]);
        }
    }
    return {std::move(sub), std::move(out), target_};
}

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open CSV file: " + path.string());
    }
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!have_header) {
            if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
                line.erase(0, 3); // UTF-8 BOM
            }
            table.header = csv::split_line(line);
            have_header = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        table.rows.push_back(csv::split_line(line));
    }
    if (!have_header) {
        throw SchemaError("CSV file has no header row: " + path.string());
    }
    return table;
}

} // namespace

Schema read_schema(const std::filesystem::path& path)
{
    const auto table = read_table(path);
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        col[table.header[i]] = i;
    }
    for (const char* required : {"name", "unit", "lower", "upper", "role"}) {
        if (!col.contains(required)) {
            throw SchemaError(std::string("schema file missing column: ") + required);
        }
    }
    Schema schema;
    bool have_target = false;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& fields = table.rows[r];
        if (fields.size() != table.header.size()) {
            throw ParseError(r + 1, "", fmt::format("schema row {} has {} fields, expected {}", r + 1, fields.size(), table.header.size()));
        }
        FeatureSpec spec;
        spec.name = fields[col["name"]];
        spec.unit = fields[col["unit"]];
        const auto lo = csv::parse_real(fields[col["lower"]]);
        const auto hi = csv::parse_real(fields[col["upper"]]);
        if (!lo || !hi) {
            throw ParseError(r + 1, !lo ? "lower" : "upper", fmt::format("schema row {}: bounds must be reals", r + 1));
        }
        spec.lower = *lo;
        spec.upper = *hi;
        const auto& role = fields[col["role"]];
        if (role == "target") {
            if (have_target) {
                throw SchemaError("schema declares more than one target");
            }
            schema.target = spec;
            have_target = true;
        } else if (role == "feature") {
            schema.features.push_back(spec);
        } else {
            throw SchemaError("schema role must be 'feature' or 'target', got: " + role);
        }
    }
    if (!have_target) {
        throw SchemaError("schema declares no target");
    }
    schema.validate();
    return schema;
}

void write_schema(const Schema& schema, const std::filesystem::path& path)
{
    std::string out = "name,unit,lower,upper,role\n";
    auto emit = [&](const FeatureSpec& f, const char* role) {
        out += csv::join({f.name, f.unit, csv::format_real(f.lower), csv::format_real(f.upper), role});
        out += '\n';
    };
    for (const auto& f : schema.features) {
        emit(f, "feature");
    }
    emit(schema.target, "target");
    csv::write_text(path, out);
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema)
{
    schema.validate();
    const auto table = read_table(path);
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        col.emplace(table.header[i], i);
    }
    std::vector<std::size_t> feature_cols;
    for (const auto& f : schema.features) {
        const auto it = col.find(f.name);
        if (it == col.end()) {
            throw SchemaError("CSV is missing schema column: " + f.name);
        }
        feature_cols.push_back(it->second);
    }
    const auto target_it = col.find(schema.target.name);
    if (target_it == col.end()) {
        throw SchemaError("CSV is missing target column: " + schema.target.name);
    }

    auto cell = [&](std::size_t r, std::size_t c) -> double {
        const auto& fields = table.rows[r];
        if (fields.size() != table.header.size()) {
            throw ParseError(r + 1, "", fmt::format("row {} has {} fields, header has {}", r + 1, fields.size(), table.header.size()));
        }
        const auto& text = fields[c];
        if (text.empty()) {
            return std::nan("");
        }
        const auto v = csv::parse_real(text);
        if (!v) {
            throw ParseError(r + 1, table.header[c], fmt::format("row {}, column '{}': cannot parse '{}' as a real", r + 1, table.header[c], text));
        }
        return *v;
    };

    Matrix features(table.rows.size(), schema.features.size());
    std::vector<double> target(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            features(r, j) = cell(r, feature_cols[j]);
        }
        target[r] = cell(r, target_it->second);
    }
    return {schema, std::move(features), std::move(target)};
}

void write_csv(const Dataset& data, const std::filesystem::path& path)
{
    std::vector<std::string> header = data.feature_names();
    header.push_back(data.target_name());
    std::string out = csv::join(header) + "\n";
    std::vector<std::string> fields(header.size());
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
        const auto row = data.row(r);
        for (std::size_t j = 0; j < row.size(); ++j) {
            fields[j] = csv::format_real(row[j]);
        }
        fields.back() = csv::format_real(data.target()[r]);
        out += csv::join(fields);
        out += '\n';
    }
    csv::write_text(path, out);
}

std::string CleanReport::to_text() const
{
    return fmt::format(
        "Cleaning summary\n"
        "  input rows:             {}\n"
        "  removed (non-finite):   {}\n"
        "  removed (feature bound):{:>2}\n"
        "  removed (target bound): {}\n"
        "  retained rows:          {}\n",
        input_rows, non_finite, feature_out_of_bounds, target_out_of_bounds, retained);
}

std::string CleanReport::to_key_value() const
{
    return fmt::format(
        "input_rows={}\nnon_finite={}\nfeature_out_of_bounds={}\ntarget_out_of_bounds={}\nretained={}\n",
        input_rows, non_finite, feature_out_of_bounds, target_out_of_bounds, retained);
}

CleanResult clean(const Dataset& raw)
{
    CleanReport report;
    report.input_rows = raw.n_rows();
    const auto& specs = raw.feature_specs();
    const auto& target_spec = raw.schema().target;
    std::vector<std::size_t> keep;
    keep.reserve(raw.n_rows());
    for (std::size_t r = 0; r < raw.n_rows(); ++r) {
        const auto row = raw.row(r);
        const double y = raw.target()[r];
        const bool finite = std::isfinite(y) && std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); });
        if (!finite) {
            ++report.non_finite;
            continue;
        }
        bool in_bounds = true;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] < specs[j].lower || row[j] > specs[j].upper) {
                in_bounds = false;
                break;
            }
        }
        if (!in_bounds) {
            ++report.feature_out_of_bounds;
            continue;
        }
        if (y < target_spec.lower || y > target_spec.upper) {
            ++report.target_out_of_bounds;
            continue;
        }
        keep.push_back(r);
    }
    report.retained = keep.size();
    if (keep.empty()) {
        throw EmptyResultError(fmt::format("cleaning removed all {} rows", raw.n_rows()));
    }
    return {raw.select_rows(keep), report};
}

std::vector<std::size_t> FoldAssignment::test_rows(std::size_t fold) const
{
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_index.size(); ++i) {
        if (fold_index[i] == fold) {
            rows.push_back(i);
        }
    }
    return rows;
}

std::vector<std::size_t> FoldAssignment::train_rows(std::size_t fold) const
{
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_index.size(); ++i) {
        if (fold_index[i] != fold) {
            rows.push_back(i);
        }
    }
    return rows;
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const
{
    std::vector<std::size_t> sizes(k, 0);
    for (auto f : fold_index) {
        ++sizes[f];
    }
    return sizes;
}

FoldAssignment kfold_split(std::size_t n_rows, std::size_t k, std::uint64_t seed)
{
    if (k < 2 || k > n_rows) {
        throw InvalidArgument(fmt::format("invalid fold count {} for {} rows (need 2 <= k <= n)", k, n_rows));
    }
    Rng rng = make_rng(seed, {0x6b666f6c64ULL});
    const auto order = random_permutation(n_rows, rng);
    FoldAssignment folds;
    folds.k = k;
    folds.fold_index.assign(n_rows, 0);
    for (std::size_t pos = 0; pos < n_rows; ++pos) {
        folds.fold_index[order[pos]] = pos % k;
    }
    return folds;
}

ColumnStats describe_column(std::span<const double> values, std::size_t bins)
{
    if (values.empty()) {
        throw EmptyResultError("cannot describe an empty column");
    }
    if (bins == 0) {
        throw InvalidArgument("histogram needs at least one bin");
    }
    ColumnStats s;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    // Rounding can push the mean a hair outside [min, max] for constant columns.
    s.mean = std::clamp(s.mean, s.min, s.max);
    double ss = 0.0;
    for (double v : values) {
        ss += (v - s.mean) * (v - s.mean);
    }
    s.std = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

    s.bin_edges.resize(bins + 1);
    const double width = (s.max - s.min) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) {
        s.bin_edges[b] = s.min + width * static_cast<double>(b);
    }
    s.bin_edges.back() = s.max;
    s.bin_counts.assign(bins, 0);
    for (double v : values) {
        std::size_t b = 0;
        if (width > 0.0) {
            b = static_cast<std::size_t>((v - s.min) / width);
            b = std::min(b, bins - 1);
        }
        ++s.bin_counts[b];
    }
    return s;
}

DescriptiveStats describe(const Dataset& data, std::size_t bins)
{
    DescriptiveStats stats;
    auto add = [&](const FeatureSpec& spec, std::span<const double> values) {
        auto col = describe_column(values, bins);
        col.name = spec.name;
        col.unit = spec.unit;
        stats.columns.push_back(std::move(col));
    };
    add(data.schema().target, data.target());
    for (std::size_t j = 0; j < data.n_features(); ++j) {
        const auto values = data.features().column(j);
        add(data.feature_specs()[j], values);
    }
    return stats;
}

std::string DescriptiveStats::to_text() const
{
    std::size_t width = 8;
    for (const auto& c : columns) {
        width = std::max(width, c.name.size());
    }
    std::string out = fmt::format("{:<{}}  {:<6} {:>12} {:>12} {:>12} {:>14}\n", "Variable", width, "Unit", "Min", "Max", "Mean", "Std. Deviation");
    for (const auto& c : columns) {
        out += fmt::format("{:<{}}  {:<6} {:>12.2f} {:>12.2f} {:>12.2f} {:>14.2f}\n", c.name, width, c.unit.empty() ? "-" : c.unit, c.min, c.max, c.mean, c.std);
    }
    return out;
}

std::string DescriptiveStats::to_csv() const
{
    std::string out = "variable,unit,min,max,mean,std\n";
    for (const auto& c : columns) {
        out += csv::join({c.name, c.unit, csv::format_real(c.min), csv::format_real(c.max), csv::format_real(c.mean), csv::format_real(c.std)});
        out += '\n';
    }
    return out;
}

std::string DescriptiveStats::histogram_csv() const
{
    std::string out = "variable,bin,lower_edge,upper_edge,count\n";
    for (const auto& c : columns) {
        for (std::size_t b = 0; b < c.bin_counts.size(); ++b) {
            out += csv::join({c.name, std::to_string(b), csv::format_real(c.bin_edges[b]), csv::format_real(c.bin_edges[b + 1]), std::to_string(c.bin_counts[b])});
            out += '\n';
        }
    }
    return out;
}

} // namespace sagopt
