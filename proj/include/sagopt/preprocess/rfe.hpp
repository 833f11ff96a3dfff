#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sagopt/dataset.hpp"
#include "sagopt/models/params.hpp"

namespace sagopt {

struct RfeOptions {
    std::size_t repeats = 5;        // permutations per feature
    double holdout_fraction = 0.2;  // share of rows scored for importance
};

struct RfeRound {
    std::vector<std::string> features; // features present in this round
    std::vector<double> importance;    // mean held-out R² drop, same order
    double baseline_r2 = 0.0;
    std::string removed; // empty for the closing round that only orders survivors
};

struct RfeResult {
    std::vector<std::string> ranking;  // survivors by importance, then eliminated names, last-eliminated first
    std::vector<std::string> selected; // the K survivors, most important first
    std::vector<RfeRound> rounds;

    // feature,rank,eliminated_round (blank for survivors)
    [[nodiscard]] std::string to_csv() const;
};

// Recursive elimination: train `trainer` on the current features, score
// permutation importance on a seeded held-out split, drop the least important
// feature (lowest index on ties), repeat until target_k remain. A closing
// round orders the survivors. Throws InvalidArgument unless 1 <= target_k <= d.
[[nodiscard]] RfeResult rfe(const Dataset& data, const RegressorSpec& trainer, std::size_t target_k, std::uint64_t seed,
                            const RfeOptions& options = {});

struct SweepPoint {
    std::size_t k = 0;
    std::vector<std::string> features;
    double mean_r2 = 0.0;
    double median_r2 = 0.0;
};

struct SweepResult {
    RfeResult elimination; // run down to the smallest K in the range
    std::vector<SweepPoint> points;

    [[nodiscard]] std::size_t best_k() const; // argmax mean R², smallest K on ties
    // k,mean_r2,median_r2,features
    [[nodiscard]] std::string to_csv() const;
};

// For each K in [k_min, k_max], k-fold CV of `trainer` on the features rfe
// keeps at K. rfe(K) is a prefix of the elimination down to k_min, so a
// single elimination run serves every K.
[[nodiscard]] SweepResult rfe_sweep(const Dataset& data, const RegressorSpec& trainer, std::size_t k_min,
                                    std::size_t k_max, std::size_t folds, std::uint64_t seed,
                                    const RfeOptions& options = {});

} // namespace sagopt
