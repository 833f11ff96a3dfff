#include "sagopt/preprocess/lof.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sagopt/csv.hpp"
#include "sagopt/error.hpp"
#include "sagopt/models/linear.hpp"
#include "sagopt/parallel.hpp"
#include "sagopt/stats.hpp"

namespace sagopt {

std::size_t LofResult::flagged() const
{
    return static_cast<std::size_t>(std::count_if(scores.begin(), scores.end(), [&](double s) { return s > threshold; }));
}

std::string LofResult::to_csv() const
{
    std::string out = "row,score,flagged\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out += fmt::format("{},{},{}\n", i, csv::format_real(scores[i]), scores[i] > threshold ? 1 : 0);
    }
    return out;
}

LofResult lof_scores(const Matrix& x, std::size_t k, double flag_fraction)
{
    const std::size_t n = x.rows();
    if (k < 1 || k >= n) {
        throw InvalidArgument(fmt::format("LOF needs 1 <= k < n (k = {}, n = {})", k, n));
    }
    if (!(flag_fraction >= 0.0 && flag_fraction <= 1.0)) {
        throw InvalidArgument("LOF flag fraction must lie in [0, 1]");
    }
    const Matrix z = Standardizer::fit(x).apply(x);
    const std::size_t d = z.cols();

    std::vector<double> kdist(n);
    std::vector<std::vector<std::size_t>> neighbours(n);
    std::vector<std::vector<double>> neighbour_dist(n);
    parallel_for(n, [&](std::size_t p) {
        std::vector<double> dist(n);
        const auto zp = z.row(p);
        for (std::size_t o = 0; o < n; ++o) {
            const auto zo = z.row(o);
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = zp[j] - zo[j];
                s += diff * diff;
            }
            dist[o] = std::sqrt(s);
        }
        std::vector<double> others;
        others.reserve(n - 1);
        for (std::size_t o = 0; o < n; ++o) {
            if (o != p) {
                others.push_back(dist[o]);
            }
        }
        std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k - 1), others.end());
        const double kd = others[k - 1];
        kdist[p] = kd;
        for (std::size_t o = 0; o < n; ++o) {
            if (o != p && dist[o] <= kd) {
                neighbours[p].push_back(o);
                neighbour_dist[p].push_back(dist[o]);
            }
        }
    });

    std::vector<double> lrd(n);
    for (std::size_t p = 0; p < n; ++p) {
        double s = 0.0;
        for (std::size_t i = 0; i < neighbours[p].size(); ++i) {
            s += std::max(kdist[neighbours[p][i]], neighbour_dist[p][i]);
        }
        const double mean_reach = s / static_cast<double>(neighbours[p].size());
        lrd[p] = 1.0 / std::max(mean_reach, lof_density_floor);
    }
    LofResult result;
    result.k = k;
    result.scores.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        double s = 0.0;
        for (const auto o : neighbours[p]) {
            s += lrd[o];
        }
        result.scores[p] = s / static_cast<double>(neighbours[p].size()) / lrd[p];
    }
    result.threshold = quantile(result.scores, 1.0 - flag_fraction);
    return result;
}

Dataset remove_outliers(const Dataset& data, const LofResult& result, double threshold)
{
    if (result.scores.size() != data.n_rows()) {
        throw DimensionError("LOF scores were computed on a different dataset");
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        if (!(result.scores[i] > threshold)) {
            keep.push_back(i);
        }
    }
    if (keep.empty()) {
        throw EmptyResultError(fmt::format("every row scores above the LOF threshold {}", threshold));
    }
    return data.select_rows(keep);
}

} // namespace sagopt
