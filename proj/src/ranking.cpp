#include "sagopt/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "sagopt/csv.hpp"

namespace sagopt {

std::vector<double> rank_row(std::span<const double> row, bool higher_is_better)
{
    const std::size_t m = row.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return higher_is_better ? row[a] > row[b] : row[a] < row[b];
    });
    std::vector<double> ranks(m);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i + 1;
        while (j < m && row[order[j]] == row[order[i]]) {
            ++j;
        }
        // positions i..j-1 share ranks i+1..j
        const double avg = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) {
            ranks[order[t]] = avg;
        }
        i = j;
    }
    return ranks;
}

FriedmanResult friedman_average_ranks(const Matrix& scores, bool higher_is_better)
{
    const std::size_t runs = scores.rows();
    const std::size_t m = scores.cols();
    if (m < 2 || runs < 2) {
        throw InvalidArgument(fmt::format("Friedman ranking needs >= 2 models and >= 2 runs (got {} x {})", runs, m));
    }
    FriedmanResult res;
    res.average_rank.assign(m, 0.0);
    for (std::size_t r = 0; r < runs; ++r) {
        const auto ranks = rank_row(scores.row(r), higher_is_better);
        for (std::size_t j = 0; j < m; ++j) {
            res.average_rank[j] += ranks[j];
        }
    }
    double sum_sq = 0.0;
    for (auto& rank : res.average_rank) {
        rank /= static_cast<double>(runs);
        sum_sq += rank * rank;
    }
    const double n = static_cast<double>(runs);
    const double k = static_cast<double>(m);
    res.statistic = 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
    res.statistic = std::max(0.0, res.statistic);
    const boost::math::chi_squared dist(k - 1.0);
    res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
    return res;
}

double paired_t_test(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw DimensionError("paired t-test needs equal-length samples");
    }
    if (a.size() < 2) {
        throw InvalidArgument("paired t-test needs at least two pairs");
    }
    const std::size_t n = a.size();
    std::vector<double> d(n);
    bool all_zero = true;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a[i] - b[i];
        all_zero = all_zero && d[i] == 0.0;
    }
    if (all_zero) {
        throw DegenerateError("paired t-test is undefined when all differences are zero");
    }
    const double nd = static_cast<double>(n);
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / nd;
    double ss = 0.0;
    for (double x : d) {
        ss += (x - mean) * (x - mean);
    }
    const double sd = std::sqrt(ss / (nd - 1.0));
    if (sd == 0.0) {
        return 0.0;
    }
    const double t = mean / (sd / std::sqrt(nd));
    if (t == 0.0) {
        return 1.0;
    }
    const boost::math::students_t dist(nd - 1.0);
    const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return std::clamp(p, 0.0, 1.0);
}

RankReport rank_models(const std::vector<std::string>& models, const Matrix& scores, bool higher_is_better)
{
    if (models.size() != scores.cols()) {
        throw DimensionError("model name count differs from score columns");
    }
    const auto fr = friedman_average_ranks(scores, higher_is_better);
    RankReport rep;
    rep.models = models;
    rep.average_rank = fr.average_rank;
    rep.friedman_statistic = fr.statistic;
    rep.friedman_p_value = fr.p_value;
    rep.best = static_cast<std::size_t>(std::min_element(fr.average_rank.begin(), fr.average_rank.end()) - fr.average_rank.begin());
    const auto best_scores = scores.column(rep.best);
    rep.pairwise_p.resize(models.size());
    for (std::size_t j = 0; j < models.size(); ++j) {
        if (j == rep.best) {
            continue;
        }
        try {
            rep.pairwise_p[j] = paired_t_test(scores.column(j), best_scores);
        } catch (const DegenerateError&) {
            rep.pairwise_p[j].reset();
        }
    }
    return rep;
}

std::string RankReport::to_text() const
{
    std::size_t width = 12;
    for (const auto& m : models) {
        width = std::max(width, m.size());
    }
    std::string out = fmt::format("{:<{}} {:>14} {:>12}\n", "Method", width, "Average rank", "P-value");
    for (std::size_t j = 0; j < models.size(); ++j) {
        const std::string p = pairwise_p[j] ? fmt::format("{:.2E}", *pairwise_p[j]) : (j == best ? "(best)" : "undef");
        out += fmt::format("{:<{}} {:>14.2f} {:>12}\n", models[j], width, average_rank[j], p);
    }
    out += fmt::format("Friedman chi-square = {:.4f} (p = {:.3E}); best = {}\n", friedman_statistic, friedman_p_value, models[best]);
    return out;
}

std::string RankReport::to_csv() const
{
    std::string out = "model,average_rank,p_value_vs_best,is_best,friedman_statistic,friedman_p_value\n";
    for (std::size_t j = 0; j < models.size(); ++j) {
        out += csv::join({models[j], csv::format_real(average_rank[j]),
                          pairwise_p[j] ? csv::format_real(*pairwise_p[j]) : "", j == best ? "1" : "0",
                          csv::format_real(friedman_statistic), csv::format_real(friedman_p_value)});
        out += '\n';
    }
    return out;
}

} // namespace sagopt
