#include "sagopt/models/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "sagopt/error.hpp"

namespace sagopt {

KnnModel::KnnModel(Matrix x, std::vector<double> y, std::size_t k, KnnWeighting weighting)
    : raw_(std::move(x)), y_(std::move(y)), k_(k), weighting_(weighting)
{
    if (raw_.rows() != y_.size()) {
        throw DimensionError("feature rows and target length differ");
    }
    if (k_ < 1 || k_ > y_.size()) {
        throw InvalidArgument(fmt::format("k = {} outside [1, {}]", k_, y_.size()));
    }
    standardizer_ = Standardizer::fit(raw_);
    z_ = standardizer_.apply(raw_);
}

double KnnModel::predict_with(std::span<const double> x, std::size_t k, KnnWeighting weighting) const
{
    const std::size_t n = y_.size();
    if (k < 1 || k > n) {
        throw InvalidArgument(fmt::format("k = {} outside [1, {}]", k, n));
    }
    if (x.size() != z_.cols()) {
        throw DimensionError("query width differs from the training features");
    }
    std::vector<double> q(x.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        q[j] = (x[j] - standardizer_.mean[j]) / standardizer_.scale[j];
    }
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto zi = z_.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double diff = zi[j] - q[j];
            s += diff * diff;
        }
        dist[i] = {s, i};
    }
    // Lexicographic (distance, row) order breaks distance ties by row index.
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k));
    if (weighting == KnnWeighting::uniform) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            s += y_[dist[i].second];
        }
        return s / static_cast<double>(k);
    }
    if (dist[0].first == 0.0) {
        double s = 0.0;
        std::size_t c = 0;
        for (std::size_t i = 0; i < k && dist[i].first == 0.0; ++i) {
            s += y_[dist[i].second];
            ++c;
        }
        return s / static_cast<double>(c);
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double w = 1.0 / std::sqrt(dist[i].first);
        num += w * y_[dist[i].second];
        den += w;
    }
    return num / den;
}

Json KnnModel::to_json() const
{
    Json rows = Json::array();
    for (std::size_t i = 0; i < raw_.rows(); ++i) {
        const auto r = raw_.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return Json{{"kind", "knn"},
                {"k", k_},
                {"weighting", weighting_ == KnnWeighting::uniform ? "uniform" : "inverse_distance"},
                {"x", std::move(rows)},
                {"y", y_}};
}

std::string KnnModel::summary() const
{
    return fmt::format("knn: k = {}, {} weighting, {} stored rows", k_,
                       weighting_ == KnnWeighting::uniform ? "uniform" : "inverse-distance", y_.size());
}

} // namespace sagopt
