#include "sagopt/optimize/campaign.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "sagopt/csv.hpp"
#include "sagopt/error.hpp"
#include "sagopt/parallel.hpp"
#include "sagopt/stats.hpp"

namespace sagopt {

FiveNumber five_number(std::span<const double> values)
{
    return {quantile(values, 0.0), quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75),
            quantile(values, 1.0)};
}

std::uint64_t method_stream(const std::string& name)
{
    std::uint64_t h = 1469598103934665603ULL; // FNV-1a
    for (const unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

CampaignResult run_campaign(const Objective& objective, const Bounds& bounds, const std::vector<MethodSpec>& methods,
                            std::size_t runs, std::uint64_t seed)
{
    if (methods.empty()) {
        throw ConfigError("optimization campaign has no methods");
    }
    if (runs < 1) {
        throw ConfigError("optimization campaign needs at least one run");
    }
    std::set<std::string> names;
    for (const auto& m : methods) {
        if (!names.insert(m.name).second) {
            throw ConfigError(fmt::format("duplicate campaign method name '{}'", m.name));
        }
        if (m.kind == MethodKind::optimizer) {
            m.optimizer.validate();
        } else if (m.samples < 1 || m.block < 1) {
            throw ConfigError(fmt::format("sampler '{}' needs positive sample and block counts", m.name));
        }
    }
    CampaignResult out;
    out.methods.resize(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
        out.methods[m].name = methods[m].name;
        out.methods[m].runs.resize(runs);
    }
    parallel_for(methods.size() * runs, [&](std::size_t task) {
        const std::size_t m = task / runs;
        const std::size_t r = task % runs;
        const auto& spec = methods[m];
        const std::uint64_t run_seed = derive_seed(seed, {method_stream(spec.name), r});
        RunTrace trace;
        switch (spec.kind) {
        case MethodKind::optimizer: {
            OptimizerConfig cfg = spec.optimizer;
            cfg.seed = run_seed;
            trace = optimize(objective, bounds, cfg);
            break;
        }
        case MethodKind::uniform_sampling:
            trace = uniform_sample(objective, bounds, spec.samples, run_seed, spec.block).trace;
            break;
        case MethodKind::latin_hypercube:
            trace = latin_hypercube_sample(objective, bounds, spec.samples, run_seed, spec.block).trace;
            break;
        }
        out.methods[m].runs[r] = std::move(trace);
    });

    for (auto& mr : out.methods) {
        std::vector<double> finals;
        for (const auto& run : mr.runs) {
            finals.push_back(run.best.fitness);
        }
        mr.final_best = five_number(finals);
        const std::size_t steps = mr.runs.front().best_so_far.size();
        for (std::size_t s = 0; s < steps; ++s) {
            std::vector<double> col;
            for (const auto& run : mr.runs) {
                col.push_back(run.best_so_far[s]);
            }
            mr.envelope_min.push_back(*std::min_element(col.begin(), col.end()));
            mr.envelope_max.push_back(*std::max_element(col.begin(), col.end()));
            mr.envelope_mean.push_back(mean(col));
        }
    }
    for (std::size_t m = 1; m < out.methods.size(); ++m) {
        if (out.methods[m].final_best.median > out.methods[out.best_method].final_best.median) {
            out.best_method = m;
        }
    }
    const auto& winner = out.methods[out.best_method];
    for (std::size_t r = 1; r < winner.runs.size(); ++r) {
        if (winner.runs[r].best.fitness > winner.runs[out.best_run].best.fitness) {
            out.best_run = r;
        }
    }
    out.candidates = winner.runs[out.best_run].final_population;
    std::stable_sort(out.candidates.begin(), out.candidates.end(),
                     [](const Individual& a, const Individual& b) { return a.fitness > b.fitness; });
    return out;
}

std::string CampaignResult::trace_csv(std::size_t method) const
{
    std::string out = "run,generation,best_so_far\n";
    const auto& mr = methods.at(method);
    for (std::size_t r = 0; r < mr.runs.size(); ++r) {
        const auto& t = mr.runs[r].best_so_far;
        for (std::size_t g = 0; g < t.size(); ++g) {
            out += fmt::format("{},{},{}\n", r, g, csv::format_real(t[g]));
        }
    }
    return out;
}

std::string CampaignResult::envelope_csv() const
{
    std::string out = "method,step,min,mean,max\n";
    for (const auto& mr : methods) {
        for (std::size_t s = 0; s < mr.envelope_min.size(); ++s) {
            out += csv::join({mr.name, std::to_string(s), csv::format_real(mr.envelope_min[s]),
                              csv::format_real(mr.envelope_mean[s]), csv::format_real(mr.envelope_max[s])}) +
                   "\n";
        }
    }
    return out;
}

std::string CampaignResult::summary_csv() const
{
    std::string out = "method,runs,evaluations_per_run,min,q1,median,q3,max\n";
    for (const auto& mr : methods) {
        const auto& f = mr.final_best;
        out += csv::join({mr.name, std::to_string(mr.runs.size()), std::to_string(mr.runs.front().evaluations),
                          csv::format_real(f.min), csv::format_real(f.q1), csv::format_real(f.median),
                          csv::format_real(f.q3), csv::format_real(f.max)}) +
               "\n";
    }
    return out;
}

std::string CampaignResult::candidates_csv(const std::vector<std::string>& feature_names,
                                           const std::string& objective_name) const
{
    std::vector<std::string> header = feature_names;
    header.push_back(objective_name);
    std::string out = csv::join(header) + "\n";
    for (const auto& c : candidates) {
        std::vector<std::string> row;
        for (const double v : c.x) {
            row.push_back(csv::format_real(v));
        }
        row.push_back(csv::format_real(c.fitness));
        out += csv::join(row) + "\n";
    }
    return out;
}

std::string CampaignResult::summary_text() const
{
    std::size_t width = 8;
    for (const auto& mr : methods) {
        width = std::max(width, mr.name.size());
    }
    std::string out = fmt::format("{:<{}} {:>6} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12}\n", "Method", width, "Runs",
                                  "Evals", "Min", "Q1", "Median", "Q3", "Max");
    for (const auto& mr : methods) {
        const auto& f = mr.final_best;
        out += fmt::format("{:<{}} {:>6} {:>6} {:>12.4f} {:>12.4f} {:>12.4f} {:>12.4f} {:>12.4f}\n", mr.name, width,
                           mr.runs.size(), mr.runs.front().evaluations, f.min, f.q1, f.median, f.q3, f.max);
    }
    return out;
}

} // namespace sagopt
