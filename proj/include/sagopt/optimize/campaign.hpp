#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sagopt/optimize/optimizer.hpp"

namespace sagopt {

enum class MethodKind { optimizer, uniform_sampling, latin_hypercube };

struct MethodSpec {
    std::string name;
    MethodKind kind = MethodKind::optimizer;
    OptimizerConfig optimizer;  // kind == optimizer (its seed is replaced per run)
    std::size_t samples = 1250; // samplers
    std::size_t block = 25;     // samplers: evaluations per trace step
};

struct FiveNumber {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

[[nodiscard]] FiveNumber five_number(std::span<const double> values);

struct MethodResult {
    std::string name;
    std::vector<RunTrace> runs;
    FiveNumber final_best;
    // Per trace step across runs.
    std::vector<double> envelope_min;
    std::vector<double> envelope_mean;
    std::vector<double> envelope_max;
};

struct CampaignResult {
    std::vector<MethodResult> methods;
    std::size_t best_method = 0; // highest median final best, first on ties
    std::size_t best_run = 0;    // that method's run with the highest final best
    std::vector<Individual> candidates;

    // run,generation,best_so_far
    [[nodiscard]] std::string trace_csv(std::size_t method) const;
    // method,step,min,mean,max
    [[nodiscard]] std::string envelope_csv() const;
    // method,runs,evaluations_per_run,min,q1,median,q3,max
    [[nodiscard]] std::string summary_csv() const;
    // feature columns then the objective column, best first
    [[nodiscard]] std::string candidates_csv(const std::vector<std::string>& feature_names,
                                             const std::string& objective_name) const;
    [[nodiscard]] std::string summary_text() const;
};

// Stream id of a method: a stable hash of its name, so adding or reordering
// methods never changes another method's runs.
[[nodiscard]] std::uint64_t method_stream(const std::string& name);

// Every method runs `runs` times with seeds derived from (seed, method, run).
// Runs execute in parallel and are stored by index. Throws ConfigError on an
// empty method list or duplicate names.
[[nodiscard]] CampaignResult run_campaign(const Objective& objective, const Bounds& bounds,
                                          const std::vector<MethodSpec>& methods, std::size_t runs, std::uint64_t seed);

} // namespace sagopt
