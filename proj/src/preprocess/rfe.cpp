#include "sagopt/preprocess/rfe.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "sagopt/csv.hpp"
#include "sagopt/error.hpp"
#include "sagopt/models/regressor.hpp"
#include "sagopt/models/validation.hpp"
#include "sagopt/parallel.hpp"
#include "sagopt/random.hpp"
#include "sagopt/stats.hpp"

namespace sagopt {

namespace {

constexpr std::uint64_t split_stream = 0x53706c;
constexpr std::uint64_t permute_stream = 0x506572;

RfeRound score_round(const Dataset& train, const Dataset& test, const std::vector<std::string>& features,
                     const RegressorSpec& trainer, std::size_t round, std::uint64_t seed, const RfeOptions& options)
{
    const Dataset tr = train.select_features(features);
    const Dataset te = test.select_features(features);
    const FittedModel model = fit(trainer, tr);
    RfeRound out;
    out.features = features;
    out.baseline_r2 = holdout_r2(model.predict(te.features()), te.target());
    out.importance.assign(features.size(), 0.0);
    const auto schema_index = [&](const std::string& name) { return *train.schema().index_of(name); };
    parallel_for(features.size(), [&](std::size_t j) {
        Matrix x = te.features();
        const std::vector<double> original = x.column(j);
        double drop = 0.0;
        for (std::size_t r = 0; r < options.repeats; ++r) {
            Rng rng = make_rng(seed, {permute_stream, round, schema_index(features[j]), r});
            const auto perm = random_permutation(original.size(), rng);
            for (std::size_t i = 0; i < original.size(); ++i) {
                x(i, j) = original[perm[i]];
            }
            drop += out.baseline_r2 - holdout_r2(model.predict(x), te.target());
        }
        out.importance[j] = drop / static_cast<double>(options.repeats);
    });
    return out;
}

} // namespace

std::string RfeResult::to_csv() const
{
    std::string out = "feature,rank,eliminated_round\n";
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        std::string round;
        for (std::size_t r = 0; r < rounds.size(); ++r) {
            if (rounds[r].removed == ranking[i]) {
                round = std::to_string(r + 1);
            }
        }
        out += csv::join({ranking[i], std::to_string(i + 1), round}) + "\n";
    }
    return out;
}

RfeResult rfe(const Dataset& data, const RegressorSpec& trainer, std::size_t target_k, std::uint64_t seed,
              const RfeOptions& options)
{
    const std::size_t d = data.n_features();
    if (target_k < 1 || target_k > d) {
        throw InvalidArgument(fmt::format("RFE target {} outside [1, {}]", target_k, d));
    }
    if (options.repeats == 0 || !(options.holdout_fraction > 0.0 && options.holdout_fraction < 1.0)) {
        throw InvalidArgument("RFE needs at least one repeat and a holdout fraction in (0, 1)");
    }
    const std::size_t n = data.n_rows();
    const auto n_test = static_cast<std::size_t>(static_cast<double>(n) * options.holdout_fraction);
    if (n_test < 2 || n - n_test < 1) {
        throw InvalidArgument("too few rows for an RFE holdout split");
    }
    Rng rng = make_rng(seed, {split_stream});
    const auto order = random_permutation(n, rng);
    std::vector<std::size_t> test_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    const Dataset train = data.select_rows(train_rows);
    const Dataset test = data.select_rows(test_rows);

    RfeResult result;
    std::vector<std::string> current = data.feature_names();
    std::vector<std::string> eliminated;
    for (std::size_t round = 0;; ++round) {
        RfeRound r = score_round(train, test, current, trainer, round, seed, options);
        if (current.size() == target_k) {
            std::vector<std::size_t> idx(current.size());
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            std::stable_sort(idx.begin(), idx.end(),
                             [&](std::size_t a, std::size_t b) { return r.importance[a] > r.importance[b]; });
            for (const auto i : idx) {
                result.selected.push_back(current[i]);
            }
            result.rounds.push_back(std::move(r));
            break;
        }
        const auto weakest = static_cast<std::size_t>(
            std::min_element(r.importance.begin(), r.importance.end()) - r.importance.begin());
        r.removed = current[weakest];
        eliminated.push_back(current[weakest]);
        current.erase(current.begin() + static_cast<std::ptrdiff_t>(weakest));
        result.rounds.push_back(std::move(r));
    }
    result.ranking = result.selected;
    result.ranking.insert(result.ranking.end(), eliminated.rbegin(), eliminated.rend());
    return result;
}

std::size_t SweepResult::best_k() const
{
    if (points.empty()) {
        throw EmptyResultError("empty RFE sweep");
    }
    const SweepPoint* best = &points.front();
    for (const auto& p : points) {
        if (p.mean_r2 > best->mean_r2 || (p.mean_r2 == best->mean_r2 && p.k < best->k)) {
            best = &p;
        }
    }
    return best->k;
}

std::string SweepResult::to_csv() const
{
    std::string out = "k,mean_r2,median_r2,features\n";
    for (const auto& p : points) {
        std::string names;
        for (const auto& f : p.features) {
            names += (names.empty() ? "" : ";") + f;
        }
        out += csv::join({std::to_string(p.k), csv::format_real(p.mean_r2), csv::format_real(p.median_r2), names}) + "\n";
    }
    return out;
}

SweepResult rfe_sweep(const Dataset& data, const RegressorSpec& trainer, std::size_t k_min, std::size_t k_max,
                      std::size_t folds, std::uint64_t seed, const RfeOptions& options)
{
    const std::size_t d = data.n_features();
    if (k_min < 1 || k_min > k_max || k_max > d) {
        throw InvalidArgument(fmt::format("RFE sweep range [{}, {}] not within [1, {}]", k_min, k_max, d));
    }
    SweepResult sweep;
    sweep.elimination = rfe(data, trainer, k_min, seed, options);
    const auto assignment = kfold_split(data, folds, seed);
    // Survivors at K: everything except the first d-K eliminated names, in schema order.
    std::vector<std::string> removed_in_order;
    for (const auto& r : sweep.elimination.rounds) {
        if (!r.removed.empty()) {
            removed_in_order.push_back(r.removed);
        }
    }
    for (std::size_t k = k_min; k <= k_max; ++k) {
        SweepPoint p;
        p.k = k;
        const std::size_t gone = d - k;
        for (const auto& name : data.feature_names()) {
            if (std::find(removed_in_order.begin(), removed_in_order.begin() + static_cast<std::ptrdiff_t>(gone), name) ==
                removed_in_order.begin() + static_cast<std::ptrdiff_t>(gone)) {
                p.features.push_back(name);
            }
        }
        const auto cv = cross_validate(trainer, data.select_features(p.features), assignment);
        std::vector<double> r2;
        for (const auto& f : cv.folds) {
            r2.push_back(f.r2.value_or(-std::numeric_limits<double>::infinity()));
        }
        p.mean_r2 = mean(r2);
        p.median_r2 = median(r2);
        sweep.points.push_back(std::move(p));
    }
    return sweep;
}

} // namespace sagopt
