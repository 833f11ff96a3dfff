#include "sagopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "sagopt/csv.hpp"
#include "sagopt/error.hpp"

namespace sagopt {

std::string_view metric_name(Metric m)
{
    switch (m) {
    case Metric::mse: return "MSE";
    case Metric::rmse: return "RMSE";
    case Metric::mae: return "MAE";
    case Metric::mape: return "MAPE";
    case Metric::smape: return "SMAPE";
    case Metric::pearson_r: return "R";
    case Metric::r2: return "R2";
    case Metric::evs: return "EVS";
    case Metric::msle: return "MSLE";
    }
    return "?";
}

bool higher_is_better(Metric m)
{
    return m == Metric::pearson_r || m == Metric::r2 || m == Metric::evs;
}

std::optional<double> MetricReport::get(Metric m) const
{
    switch (m) {
    case Metric::mse: return mse;
    case Metric::rmse: return rmse;
    case Metric::mae: return mae;
    case Metric::mape: return mape;
    case Metric::smape: return smape;
    case Metric::pearson_r: return pearson_r;
    case Metric::r2: return r2;
    case Metric::evs: return evs;
    case Metric::msle: return msle;
    }
    return std::nullopt;
}

MetricReport compute_metrics(std::span<const double> pred, std::span<const double> actual, const MetricOptions& options)
{
    if (pred.size() != actual.size()) {
        throw DimensionError(fmt::format("prediction length {} differs from actual length {}", pred.size(), actual.size()));
    }
    if (pred.size() < 2) {
        throw InvalidArgument("metrics need at least two samples");
    }
    const std::size_t n = pred.size();
    const double nd = static_cast<double>(n);

    double mean_p = 0.0;
    double mean_a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_p += pred[i];
        mean_a += actual[i];
    }
    mean_p /= nd;
    mean_a /= nd;

    double sq = 0.0;
    double abs_err = 0.0;
    double ape = 0.0;
    bool ape_defined = true;
    double sape = 0.0;
    double cov = 0.0;
    double var_p = 0.0;
    double var_a = 0.0;
    double sle = 0.0;
    bool sle_defined = true;
    double mean_e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = pred[i] - actual[i];
        mean_e += e;
        sq += e * e;
        abs_err += std::abs(e);

        double denom = std::abs(actual[i]);
        if (options.mape_epsilon) {
            denom = std::max(denom, *options.mape_epsilon);
        }
        if (denom == 0.0) {
            ape_defined = false;
        } else {
            ape += std::abs(e) / denom;
        }

        const double half_sum = 0.5 * (std::abs(pred[i]) + std::abs(actual[i]));
        if (half_sum > 0.0) {
            sape += std::abs(e) / half_sum;
        }

        const double dp = pred[i] - mean_p;
        const double da = actual[i] - mean_a;
        cov += dp * da;
        var_p += dp * dp;
        var_a += da * da;

        if (pred[i] <= -1.0 || actual[i] <= -1.0) {
            sle_defined = false;
        } else {
            const double d = std::log1p(pred[i]) - std::log1p(actual[i]);
            sle += d * d;
        }
    }
    mean_e /= nd;
    double var_e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (pred[i] - actual[i]) - mean_e;
        var_e += d * d;
    }

    MetricReport r;
    r.mse = sq / nd;
    r.rmse = std::sqrt(r.mse);
    r.mae = abs_err / nd;
    if (ape_defined) {
        r.mape = 100.0 * ape / nd;
    }
    r.smape = 100.0 * sape / nd;
    if (var_p > 0.0 && var_a > 0.0) {
        r.pearson_r = std::clamp(cov / std::sqrt(var_p * var_a), -1.0, 1.0);
    }
    if (var_a > 0.0) {
        r.r2 = 1.0 - sq / var_a;
        r.evs = 1.0 - var_e / var_a;
    }
    if (sle_defined) {
        r.msle = sle / nd;
    }
    return r;
}

MetricStats summarize_values(std::span<const double> values)
{
    if (values.empty()) {
        throw EmptyResultError("cannot summarize an empty list");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    MetricStats s;
    s.defined = v.size();
    s.min = v.front();
    s.max = v.back();
    const double n = static_cast<double>(v.size());
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.front() == v.back()) {
        s.mean = v.front(); // the running sum can drift off a constant column
    }
    const std::size_t mid = v.size() / 2;
    s.median = v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
    if (v.size() > 1 && v.front() != v.back()) {
        double ss = 0.0;
        for (double x : v) {
            ss += (x - s.mean) * (x - s.mean);
        }
        s.std = std::sqrt(ss / (n - 1.0));
    }
    return s;
}

FoldSummary summarize_folds(std::span<const MetricReport> reports)
{
    if (reports.empty()) {
        throw EmptyResultError("no fold reports to summarize");
    }
    FoldSummary summary;
    summary.folds = reports.size();
    for (Metric m : all_metrics) {
        std::vector<double> values;
        for (const auto& r : reports) {
            if (const auto v = r.get(m)) {
                values.push_back(*v);
            }
        }
        if (!values.empty()) {
            summary.stats[static_cast<std::size_t>(m)] = summarize_values(values);
        }
    }
    return summary;
}

std::string FoldSummary::to_text(std::string_view title) const
{
    std::string out = fmt::format("{}\n{:<8}", title, "");
    for (Metric m : all_metrics) {
        out += fmt::format(" {:>10}", metric_name(m));
    }
    out += '\n';
    const char* labels[] = {"Min", "Max", "Mean", "Median", "STD"};
    for (int row = 0; row < 5; ++row) {
        out += fmt::format("{:<8}", labels[row]);
        for (Metric m : all_metrics) {
            const auto& s = (*this)[m];
            if (!s) {
                out += fmt::format(" {:>10}", "undef");
                continue;
            }
            const double v = row == 0 ? s->min : row == 1 ? s->max : row == 2 ? s->mean : row == 3 ? s->median : s->std;
            out += fmt::format(" {:>10.2E}", v);
        }
        out += '\n';
    }
    return out;
}

std::string FoldSummary::csv_header()
{
    return "model,metric,min,max,mean,median,std,defined_folds\n";
}

std::string FoldSummary::to_csv(std::string_view model) const
{
    std::string out;
    for (Metric m : all_metrics) {
        const auto& s = (*this)[m];
        std::vector<std::string> fields{std::string(model), std::string(metric_name(m))};
        if (s) {
            for (double v : {s->min, s->max, s->mean, s->median, s->std}) {
                fields.push_back(csv::format_real(v));
            }
            fields.push_back(std::to_string(s->defined));
        } else {
            fields.insert(fields.end(), {"", "", "", "", "", "0"});
        }
        out += csv::join(fields) + "\n";
    }
    return out;
}

std::string fold_metrics_csv_header()
{
    std::string out = "model,fold";
    for (Metric m : all_metrics) {
        out += ",";
        out += metric_name(m);
    }
    return out + "\n";
}

std::string fold_metrics_csv(std::string_view model, std::span<const MetricReport> reports)
{
    std::string out;
    for (std::size_t f = 0; f < reports.size(); ++f) {
        std::vector<std::string> fields{std::string(model), std::to_string(f)};
        for (Metric m : all_metrics) {
            const auto v = reports[f].get(m);
            fields.push_back(v ? csv::format_real(*v) : "");
        }
        out += csv::join(fields) + "\n";
    }
    return out;
}

} // namespace sagopt
