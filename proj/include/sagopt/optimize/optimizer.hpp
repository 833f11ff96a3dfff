#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sagopt/dataset.hpp"
#include "sagopt/random.hpp"

namespace sagopt {

class Bounds {
public:
    // Throws InvalidArgument on length mismatch, non-finite values or lower > upper.
    Bounds(std::vector<double> lower, std::vector<double> upper);
    [[nodiscard]] static Bounds from_features(const std::vector<FeatureSpec>& features);

    [[nodiscard]] std::size_t dim() const noexcept { return lower_.size(); }
    [[nodiscard]] const std::vector<double>& lower() const noexcept { return lower_; }
    [[nodiscard]] const std::vector<double>& upper() const noexcept { return upper_; }
    [[nodiscard]] double range(std::size_t j) const { return upper_[j] - lower_[j]; }

    [[nodiscard]] bool contains(std::span<const double> x) const;
    void clip(std::span<double> x) const;
    // Mirror an overshoot back inside once, then clip whatever is still out.
    void reflect(std::span<double> x) const;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

struct Individual {
    std::vector<double> x;
    double fitness = -std::numeric_limits<double>::infinity();
};

// Maximized. Must be safe to call concurrently.
using Objective = std::function<double(std::span<const double>)>;

// Evaluates batches of points in parallel, counting calls and auditing that
// every point is feasible and every fitness finite (InvalidArgument otherwise).
class Evaluator {
public:
    Evaluator(const Objective& objective, const Bounds& bounds) : objective_(objective), bounds_(bounds) {}

    [[nodiscard]] std::vector<double> evaluate(const std::vector<std::vector<double>>& points);
    [[nodiscard]] std::size_t count() const noexcept { return count_; }

private:
    const Objective& objective_;
    const Bounds& bounds_;
    std::size_t count_ = 0;
};

// Coordinates lower + u * (upper - lower), u ~ U[0, 1). Fitness left unset.
[[nodiscard]] std::vector<Individual> initialize_population(const Bounds& bounds, std::size_t population, Rng& rng);
[[nodiscard]] std::vector<Individual> initialize_population(const Bounds& bounds, std::size_t population,
                                                            std::uint64_t seed);

enum class Algorithm { de, ga, pso };
enum class BoundHandling { clip, reflect };
enum class DeStrategy {
    rand1,       // V = X_r3 + F (X_r1 - X_r2)
    target_base1 // V = X_i + F (X_r1 - X_r2)
};

struct DeSettings {
    double f = 0.5;
    double cr = 0.7;
    DeStrategy strategy = DeStrategy::rand1;
};

struct GaSettings {
    double crossover_rate = 0.7;
    double mutation_rate = 0.2;
    double mutation_sigma = 0.1; // fraction of each dimension's range
    std::size_t tournament = 3;
};

struct PsoSettings {
    double w = 0.729;
    double c1 = 2.0;
    double c2 = 2.0;
    double v_min = -1.0;
    double v_max = 1.0;
    bool scale_to_range = true; // velocity limits are fractions of (upper - lower)
};

struct OptimizerConfig {
    Algorithm algorithm = Algorithm::de;
    std::size_t population = 25;
    std::size_t generations = 50;
    DeSettings de;
    GaSettings ga;
    PsoSettings pso;
    BoundHandling bound_handling = BoundHandling::clip;
    std::uint64_t seed = 0;

    // Throws ConfigError on out-of-range settings for the chosen algorithm.
    void validate() const;
};

struct RunTrace {
    std::vector<double> best_so_far; // [0] after initialization, [g] after generation g
    Individual best;
    std::size_t evaluations = 0;
    std::vector<Individual> final_population;
};

[[nodiscard]] RunTrace de_optimize(const Objective& objective, const Bounds& bounds, const OptimizerConfig& config);
[[nodiscard]] RunTrace ga_optimize(const Objective& objective, const Bounds& bounds, const OptimizerConfig& config);
[[nodiscard]] RunTrace pso_optimize(const Objective& objective, const Bounds& bounds, const OptimizerConfig& config);
[[nodiscard]] RunTrace optimize(const Objective& objective, const Bounds& bounds, const OptimizerConfig& config);

// Single-step helpers, exposed so hand calculations can be checked directly.
[[nodiscard]] std::vector<double> de_mutant(std::span<const double> base, std::span<const double> r1,
                                            std::span<const double> r2, double f);
// Children swap the segment [p, q); requires p <= q <= size.
[[nodiscard]] std::pair<std::vector<double>, std::vector<double>> two_point_crossover(std::span<const double> a,
                                                                                      std::span<const double> b,
                                                                                      std::size_t p, std::size_t q);

struct PsoStep {
    std::vector<double> velocity;
    std::vector<double> position;
};

// One velocity/position update with the given r1, r2 draws per coordinate.
// Velocity limits are absolute here; position is bound-handled with clipping.
[[nodiscard]] PsoStep pso_velocity_step(std::span<const double> x, std::span<const double> v,
                                        std::span<const double> personal_best, std::span<const double> global_best,
                                        double w, double c1, double c2, std::span<const double> r1,
                                        std::span<const double> r2, std::span<const double> v_min,
                                        std::span<const double> v_max, const Bounds& bounds);

struct SampleResult {
    Individual best;
    std::vector<Individual> samples;
    RunTrace trace; // best-so-far after each block of evaluations
};

// n i.i.d. box-uniform points.
[[nodiscard]] SampleResult uniform_sample(const Objective& objective, const Bounds& bounds, std::size_t n,
                                          std::uint64_t seed, std::size_t block = 25);

// Latin hypercube: along each dimension the n points occupy the n equal strata
// exactly once (independent permutation per dimension, uniform jitter inside).
[[nodiscard]] std::vector<std::vector<double>> latin_hypercube_points(const Bounds& bounds, std::size_t n, Rng& rng);
[[nodiscard]] SampleResult latin_hypercube_sample(const Objective& objective, const Bounds& bounds, std::size_t n,
                                                  std::uint64_t seed, std::size_t block = 25);

} // namespace sagopt
