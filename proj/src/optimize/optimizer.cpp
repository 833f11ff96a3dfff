#include "sagopt/optimize/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sagopt/error.hpp"
#include "sagopt/parallel.hpp"

namespace sagopt {

Bounds::Bounds(std::vector<double> lower, std::vector<double> upper) : lower_(std::move(lower)), upper_(std::move(upper))
{
    if (lower_.size() != upper_.size()) {
        throw InvalidArgument("lower and upper bounds differ in length");
    }
    for (std::size_t j = 0; j < lower_.size(); ++j) {
        if (!std::isfinite(lower_[j]) || !std::isfinite(upper_[j]) || lower_[j] > upper_[j]) {
            throw InvalidArgument(fmt::format("invalid bounds [{}, {}] in dimension {}", lower_[j], upper_[j], j));
        }
    }
}

Bounds Bounds::from_features(const std::vector<FeatureSpec>& features)
{
    std::vector<double> lo;
    std::vector<double> hi;
    for (const auto& f : features) {
        lo.push_back(f.lower);
        hi.push_back(f.upper);
    }
    return {std::move(lo), std::move(hi)};
}

bool Bounds::contains(std::span<const double> x) const
{
    if (x.size() != dim()) {
        return false;
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!(x[j] >= lower_[j] && x[j] <= upper_[j])) {
            return false;
        }
    }
    return true;
}

void Bounds::clip(std::span<double> x) const
{
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = std::clamp(x[j], lower_[j], upper_[j]);
    }
}

void Bounds::reflect(std::span<double> x) const
{
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] < lower_[j]) {
            x[j] = lower_[j] + (lower_[j] - x[j]);
        } else if (x[j] > upper_[j]) {
            x[j] = upper_[j] - (x[j] - upper_[j]);
        }
    }
    clip(x);
}

std::vector<double> Evaluator::evaluate(const std::vector<std::vector<double>>& points)
{
    for (const auto& p : points) {
        if (!bounds_.contains(p)) {
            throw InvalidArgument("optimizer produced a point outside the bounds");
        }
    }
    std::vector<double> out(points.size());
    parallel_for(points.size(), [&](std::size_t i) { out[i] = objective_(points[i]); });
    for (const double f : out) {
        if (!std::isfinite(f)) {
            throw InvalidArgument("objective returned a non-finite fitness");
        }
    }
    count_ += points.size();
    return out;
}

std::vector<Individual> initialize_population(const Bounds& bounds, std::size_t population, Rng& rng)
{
    std::vector<Individual> pop(population);
    for (auto& ind : pop) {
        ind.x.resize(bounds.dim());
        for (std::size_t j = 0; j < bounds.dim(); ++j) {
            ind.x[j] = bounds.lower()[j] + uniform01(rng) * bounds.range(j);
        }
        bounds.clip(ind.x);
    }
    return pop;
}

std::vector<Individual> initialize_population(const Bounds& bounds, std::size_t population, std::uint64_t seed)
{
    Rng rng = make_rng(seed, {0x496e6974ULL});
    return initialize_population(bounds, population, rng);
}

void OptimizerConfig::validate() const
{
    const auto rate = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (generations < 1) {
        throw ConfigError("optimizer needs at least one generation");
    }
    switch (algorithm) {
    case Algorithm::de:
        if (population < 4) {
            throw ConfigError("DE needs a population of at least 4 (three distinct donors besides the target)");
        }
        if (!(de.f > 0.0) || !rate(de.cr)) {
            throw ConfigError("DE needs F > 0 and CR in [0, 1]");
        }
        break;
    case Algorithm::ga:
        if (population < 2) {
            throw ConfigError("GA needs a population of at least 2");
        }
        if (!rate(ga.crossover_rate) || !rate(ga.mutation_rate) || !(ga.mutation_sigma >= 0.0) || ga.tournament < 1) {
            throw ConfigError("GA rates must lie in [0, 1], sigma >= 0 and tournament size >= 1");
        }
        break;
    case Algorithm::pso:
        if (population < 1) {
            throw ConfigError("PSO needs a population of at least 1");
        }
        if (!(pso.v_min <= pso.v_max)) {
            throw ConfigError("PSO velocity limits are inverted");
        }
        break;
    }
}

namespace {

void handle_bounds(const Bounds& bounds, BoundHandling mode, std::span<double> x)
{
    if (mode == BoundHandling::reflect) {
        bounds.reflect(x);
    } else {
        bounds.clip(x);
    }
}

std::vector<std::vector<double>> positions(const std::vector<Individual>& pop)
{
    std::vector<std::vector<double>> out;
    out.reserve(pop.size());
    for (const auto& ind : pop) {
        out.push_back(ind.x);
    }
    return out;
}

void assign_fitness(std::vector<Individual>& pop, const std::vector<double>& f)
{
    for (std::size_t i = 0; i < pop.size(); ++i) {
        pop[i].fitness = f[i];
    }
}

// First index of the maximum, so equal fitness keeps the earlier individual.
std::size_t best_index(const std::vector<Individual>& pop)
{
    std::size_t b = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
        if (pop[i].fitness > pop[b].fitness) {
            b = i;
        }
    }
    return b;
}

void record(RunTrace& trace, const std::vector<Individual>& pop)
{
    const auto& cand = pop[best_index(pop)];
    if (trace.best_so_far.empty() || cand.fitness > trace.best.fitness) {
        trace.best = cand;
    }
    trace.best_so_far.push_back(trace.best.fitness);
}

std::size_t pick_distinct(Rng& rng, std::size_t n, std::initializer_list<std::size_t> avoid)
{
    while (true) {
        const std::size_t c = uniform_index(rng, n);
        if (std::find(avoid.begin(), avoid.end(), c) == avoid.end()) {
            return c;
        }
    }
}

} // namespace

std::vector<double> de_mutant(std::span<const double> base, std::span<const double> r1, std::span<const double> r2,
                              double f)
{
    if (base.size() != r1.size() || base.size() != r2.size()) {
        throw DimensionError("DE donor vectors differ in length");
    }
    std::vector<double> v(base.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] = base[j] + f * (r1[j] - r2[j]);
    }
    return v;
}

RunTrace de_optimize(const Objective& objective, const Bounds& bounds, const OptimizerConfig& config)
{
    config.validate();
    Rng rng = make_rng(config.seed, {0x4445ULL});
    Evaluator eval(objective, bounds);
    const std::size_t np = config.population;
    const std::size_t d = bounds.dim();
    auto pop = initialize_population(bounds, np, rng);
    assign_fitness(pop, eval.evaluate(positions(pop)));
    RunTrace trace;
    record(trace, pop);
    for (std::size_t g = 0; g < config.generations; ++g) {
        std::vector<std::vector<double>> trials(np);
        for (std::size_t i = 0; i < np; ++i) {
            const std::size_t r1 = pick_distinct(rng, np, {i});
            const std::size_t r2 = pick_distinct(rng, np, {i, r1});
            const std::size_t r3 = pick_distinct(rng, np, {i, r1, r2});
            const auto& base = config.de.strategy == DeStrategy::rand1 ? pop[r3].x : pop[i].x;
            const auto mutant = de_mutant(base, pop[r1].x, pop[r2].x, config.de.f);
            const std::size_t j_rand = d > 0 ? uniform_index(rng, d) : 0;
            auto& u = trials[i];
            u.resize(d);
            for (std::size_t j = 0; j < d; ++j) {
                const double draw = uniform01(rng);
                u[j] = (draw < config.de.cr || j == j_rand) ? mutant[j] : pop[i].x[j];
            }
            handle_bounds(bounds, config.bound_handling, u);
        }
        const auto f = eval.evaluate(trials);
        for (std::size_t i = 0; i < np; ++i) {
            if (f[i] >= pop[i].fitness) {
                pop[i].x = std::move(trials[i]);
                pop[i].fitness = f[i];
            }
        }
        record(trace, pop);
    }
    trace.evaluations = eval.count();
    trace.final_population = std::move(pop);
    return trace;
}

std::pair<std::vector<double>, std::vector<double>> two_point_crossover(std::span<const double> a,
                                                                        std::span<const double> b, std::size_t p,
                                                                        std::size_t q)
{
    if (a.size() != b.size()) {
        throw DimensionError("crossover parents differ in length");
    }
    if (p > q || q > a.size()) {
        throw InvalidArgument("crossover cut points must satisfy p <= q <= length");
    }
    std::vector<double> c1(a.begin(), a.end());
    std::vector<double> c2(b.begin(), b.end());
    for (std::size_t j = p; j < q; ++j) {
        std::swap(c1[j], c2[j]);
    }
    return {std::move(c1), std::move(c2)};
}

RunTrace ga_optimize(const Objective& objective, const Bounds& bounds, const OptimizerConfig& config)
{
    config.validate();
    Rng rng = make_rng(config.seed, {0x4741ULL});
    Evaluator eval(objective, bounds);
    const std::size_t np = config.population;
    const std::size_t d = bounds.dim();
    const auto& ga = config.ga;
    auto pop = initialize_population(bounds, np, rng);
    assign_fitness(pop, eval.evaluate(positions(pop)));
    RunTrace trace;
    record(trace, pop);

    const auto tournament = [&]() -> const Individual& {
        std::size_t winner = uniform_index(rng, np);
        for (std::size_t t = 1; t < ga.tournament; ++t) {
            const std::size_t c = uniform_index(rng, np);
            if (pop[c].fitness > pop[winner].fitness) {
                winner = c;
            }
        }
        return pop[winner];
    };
    for (std::size_t g = 0; g < config.generations; ++g) {
        std::vector<std::vector<double>> children;
        children.reserve(np + 1);
        while (children.size() < np) {
            const auto& a = tournament();
            const auto& b = tournament();
            std::vector<double> c1 = a.x;
            std::vector<double> c2 = b.x;
            if (uniform01(rng) < ga.crossover_rate) {
                std::size_t p = uniform_index(rng, d + 1);
                std::size_t q = uniform_index(rng, d + 1);
                if (p > q) {
                    std::swap(p, q);
                }
                std::tie(c1, c2) = two_point_crossover(a.x, b.x, p, q);
            }
            for (auto* c : {&c1, &c2}) {
                for (std::size_t j = 0; j < d; ++j) {
                    if (uniform01(rng) < ga.mutation_rate) {
                        const double sigma = ga.mutation_sigma * bounds.range(j);
                        (*c)[j] += sigma > 0.0 ? std::normal_distribution<double>(0.0, sigma)(rng) : 0.0;
                    }
                }
                handle_bounds(bounds, config.bound_handling, *c);
            }
            children.push_back(std::move(c1));
            children.push_back(std::move(c2));
        }
        children.resize(np);
        const auto f = eval.evaluate(children);
        const Individual incumbent = pop[best_index(pop)];
        for (std::size_t i = 0; i < np; ++i) {
            pop[i].x = std::move(children[i]);
            pop[i].fitness = f[i];
        }
        // Elitism of one: the previous best replaces the worst child unless a child matches it.
        const auto best_child = pop[best_index(pop)].fitness;
        if (incumbent.fitness > best_child) {
            std::size_t worst = 0;
            for (std::size_t i = 1; i < np; ++i) {
                if (pop[i].fitness < pop[worst].fitness) {
                    worst = i;
                }
            }
            pop[worst] = incumbent;
        }
        record(trace, pop);
    }
    trace.evaluations = eval.count();
    trace.final_population = std::move(pop);
    return trace;
}

PsoStep pso_velocity_step(std::span<const double> x, std::span<const double> v, std::span<const double> personal_best,
                          std::span<const double> global_best, double w, double c1, double c2,
                          std::span<const double> r1, std::span<const double> r2, std::span<const double> v_min,
                          std::span<const double> v_max, const Bounds& bounds)
{
    const std::size_t d = x.size();
    for (const auto s : {v.size(), personal_best.size(), global_best.size(), r1.size(), r2.size(), v_min.size(),
                         v_max.size(), bounds.dim()}) {
        if (s != d) {
            throw DimensionError("PSO step inputs differ in length");
        }
    }
    PsoStep step{std::vector<double>(d), std::vector<double>(d)};
    for (std::size_t j = 0; j < d; ++j) {
        const double raw = w * v[j] + c1 * r1[j] * (personal_best[j] - x[j]) + c2 * r2[j] * (global_best[j] - x[j]);
        step.velocity[j] = std::clamp(raw, v_min[j], v_max[j]);
        step.position[j] = x[j] + step.velocity[j];
    }
    bounds.clip(step.position);
    return step;
}

RunTrace pso_optimize(const Objective& objective, const Bounds& bounds, const OptimizerConfig& config)
{
    config.validate();
    Rng rng = make_rng(config.seed, {0x50534fULL});
    Evaluator eval(objective, bounds);
    const std::size_t np = config.population;
    const std::size_t d = bounds.dim();
    const auto& ps = config.pso;
    std::vector<double> v_min(d);
    std::vector<double> v_max(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double scale = ps.scale_to_range ? bounds.range(j) : 1.0;
        v_min[j] = ps.v_min * scale;
        v_max[j] = ps.v_max * scale;
    }
    auto pop = initialize_population(bounds, np, rng);
    assign_fitness(pop, eval.evaluate(positions(pop)));
    std::vector<std::vector<double>> vel(np, std::vector<double>(d, 0.0));
    std::vector<Individual> personal = pop;
    Individual global = pop[best_index(pop)];
    RunTrace trace;
    record(trace, pop);
    std::vector<double> r1(d);
    std::vector<double> r2(d);
    for (std::size_t g = 0; g < config.generations; ++g) {
        for (std::size_t i = 0; i < np; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                r1[j] = uniform01(rng);
                r2[j] = uniform01(rng);
            }
            auto step = pso_velocity_step(pop[i].x, vel[i], personal[i].x, global.x, ps.w, ps.c1, ps.c2, r1, r2,
                                          v_min, v_max, bounds);
            if (config.bound_handling == BoundHandling::reflect) {
                for (std::size_t j = 0; j < d; ++j) {
                    step.position[j] = pop[i].x[j] + step.velocity[j];
                }
                bounds.reflect(step.position);
            }
            vel[i] = std::move(step.velocity);
            pop[i].x = std::move(step.position);
        }
        assign_fitness(pop, eval.evaluate(positions(pop)));
        for (std::size_t i = 0; i < np; ++i) {
            if (pop[i].fitness > personal[i].fitness) {
                personal[i] = pop[i];
            }
        }
        const auto& cand = personal[best_index(personal)];
        if (cand.fitness > global.fitness) {
            global = cand;
        }
        record(trace, pop);
    }
    trace.evaluations = eval.count();
    trace.final_population = std::move(pop);
    return trace;
}

RunTrace optimize(const Objective& objective, const Bounds& bounds, const OptimizerConfig& config)
{
    switch (config.algorithm) {
    case Algorithm::de:
        return de_optimize(objective, bounds, config);
    case Algorithm::ga:
        return ga_optimize(objective, bounds, config);
    case Algorithm::pso:
        return pso_optimize(objective, bounds, config);
    }
    throw ConfigError("unknown optimizer");
}

namespace {

SampleResult evaluate_samples(const Objective& objective, const Bounds& bounds,
                              std::vector<std::vector<double>> points, std::size_t block)
{
    if (block == 0) {
        throw InvalidArgument("sampling block size must be positive");
    }
    Evaluator eval(objective, bounds);
    SampleResult out;
    out.samples.reserve(points.size());
    for (std::size_t start = 0; start < points.size(); start += block) {
        const std::size_t end = std::min(points.size(), start + block);
        std::vector<std::vector<double>> chunk(points.begin() + static_cast<std::ptrdiff_t>(start),
                                               points.begin() + static_cast<std::ptrdiff_t>(end));
        const auto f = eval.evaluate(chunk);
        std::vector<Individual> evaluated;
        for (std::size_t i = 0; i < chunk.size(); ++i) {
            evaluated.push_back({std::move(chunk[i]), f[i]});
        }
        record(out.trace, evaluated);
        out.samples.insert(out.samples.end(), evaluated.begin(), evaluated.end());
    }
    out.best = out.trace.best;
    out.trace.evaluations = eval.count();
    // The closing block stands in for a final population.
    const std::size_t tail = std::min(block, out.samples.size());
    out.trace.final_population.assign(out.samples.end() - static_cast<std::ptrdiff_t>(tail), out.samples.end());
    return out;
}

} // namespace

SampleResult uniform_sample(const Objective& objective, const Bounds& bounds, std::size_t n, std::uint64_t seed,
                            std::size_t block)
{
    if (n < 1) {
        throw InvalidArgument("uniform sampling needs at least one point");
    }
    Rng rng = make_rng(seed, {0x555253ULL});
    return evaluate_samples(objective, bounds, positions(initialize_population(bounds, n, rng)), block);
}

std::vector<std::vector<double>> latin_hypercube_points(const Bounds& bounds, std::size_t n, Rng& rng)
{
    if (n < 1) {
        throw InvalidArgument("Latin hypercube sampling needs at least one point");
    }
    const std::size_t d = bounds.dim();
    std::vector<std::vector<double>> pts(n, std::vector<double>(d));
    const auto nn = static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
        const auto perm = random_permutation(n, rng);
        const double lo = bounds.lower()[j];
        const double range = bounds.range(j);
        for (std::size_t i = 0; i < n; ++i) {
            const auto stratum = static_cast<double>(perm[i]);
            double x = lo + (stratum + uniform01(rng)) / nn * range;
            x = std::clamp(x, lo, bounds.upper()[j]);
            if (range > 0.0) {
                // Rounding can push a point across a stratum edge; step back inside.
                const auto cell = [&](double v) { return std::floor(nn * (v - lo) / range); };
                while (cell(x) > stratum && x > lo) {
                    x = std::nextafter(x, -HUGE_VAL);
                }
                while (cell(x) < stratum && x < bounds.upper()[j]) {
                    x = std::nextafter(x, HUGE_VAL);
                }
            }
            pts[i][j] = x;
        }
    }
    return pts;
}

SampleResult latin_hypercube_sample(const Objective& objective, const Bounds& bounds, std::size_t n,
                                    std::uint64_t seed, std::size_t block)
{
    Rng rng = make_rng(seed, {0x4c4853ULL});
    return evaluate_samples(objective, bounds, latin_hypercube_points(bounds, n, rng), block);
}

} // namespace sagopt
