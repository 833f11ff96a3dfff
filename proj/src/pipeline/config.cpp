#include "sagopt/pipeline/config.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <fmt/format.h>

#include "sagopt/csv.hpp"
#include "sagopt/error.hpp"
#include "sagopt/models/params.hpp"

namespace sagopt {

using Json = nlohmann::ordered_json;

namespace {

void only_keys(const Json& j, std::string_view where, std::initializer_list<std::string_view> allowed)
{
    if (!j.is_object()) {
        throw ConfigError(fmt::format("'{}' must be an object", where));
    }
    for (const auto& [k, v] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
            throw ConfigError(fmt::format("unknown key '{}' in '{}'", k, where));
        }
    }
}

template <class T>
void read(const Json& j, std::string_view key, T& out, std::string_view where)
{
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return;
    }
    try {
        out = it->template get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(fmt::format("'{}.{}' has the wrong type", where, key));
    }
}

const Json& section(const Json& j, std::string_view key)
{
    static const Json empty = Json::object();
    const auto it = j.find(key);
    return it == j.end() ? empty : *it;
}

std::string value_text(const Json& v)
{
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_boolean()) {
        return v.get<bool>() ? "true" : "false";
    }
    if (v.is_number_integer()) {
        return std::to_string(v.get<long long>());
    }
    if (v.is_number()) {
        return csv::format_real(v.get<double>());
    }
    throw ConfigError("hyperparameter values must be strings, numbers or booleans");
}

const char* kind_name(const MethodSpec& m)
{
    switch (m.kind) {
    case MethodKind::uniform_sampling:
        return "urs";
    case MethodKind::latin_hypercube:
        return "lhs";
    case MethodKind::optimizer:
        break;
    }
    switch (m.optimizer.algorithm) {
    case Algorithm::de:
        return "de";
    case Algorithm::ga:
        return "ga";
    case Algorithm::pso:
        return "pso";
    }
    return "?";
}

Json method_to_json(const MethodSpec& m)
{
    Json j{{"name", m.name}, {"kind", kind_name(m)}};
    if (m.kind != MethodKind::optimizer) {
        j["samples"] = m.samples;
        j["block"] = m.block;
        return j;
    }
    const auto& o = m.optimizer;
    j["population"] = o.population;
    j["generations"] = o.generations;
    j["bounds"] = o.bound_handling == BoundHandling::clip ? "clip" : "reflect";
    switch (o.algorithm) {
    case Algorithm::de:
        j["F"] = o.de.f;
        j["CR"] = o.de.cr;
        j["strategy"] = o.de.strategy == DeStrategy::rand1 ? "rand1" : "target_base1";
        break;
    case Algorithm::ga:
        j["crossover_rate"] = o.ga.crossover_rate;
        j["mutation_rate"] = o.ga.mutation_rate;
        j["mutation_sigma"] = o.ga.mutation_sigma;
        j["tournament"] = o.ga.tournament;
        break;
    case Algorithm::pso:
        j["w"] = o.pso.w;
        j["c1"] = o.pso.c1;
        j["c2"] = o.pso.c2;
        j["v_min"] = o.pso.v_min;
        j["v_max"] = o.pso.v_max;
        j["scale_to_range"] = o.pso.scale_to_range;
        break;
    }
    return j;
}

MethodSpec method_from_json(const Json& j)
{
    MethodSpec m;
    std::string kind;
    read(j, "name", m.name, "optimize.methods");
    read(j, "kind", kind, "optimize.methods");
    const std::string where = fmt::format("optimize.methods[{}]", m.name);
    if (kind == "urs" || kind == "lhs") {
        only_keys(j, where, {"name", "kind", "samples", "block"});
        m.kind = kind == "urs" ? MethodKind::uniform_sampling : MethodKind::latin_hypercube;
        read(j, "samples", m.samples, where);
        read(j, "block", m.block, where);
    } else if (kind == "de" || kind == "ga" || kind == "pso") {
        auto& o = m.optimizer;
        std::string bounds = "clip";
        if (kind == "de") {
            only_keys(j, where, {"name", "kind", "population", "generations", "bounds", "F", "CR", "strategy"});
            o.algorithm = Algorithm::de;
            std::string strategy = "rand1";
            read(j, "F", o.de.f, where);
            read(j, "CR", o.de.cr, where);
            read(j, "strategy", strategy, where);
            if (strategy != "rand1" && strategy != "target_base1") {
                throw ConfigError(fmt::format("{}: strategy must be rand1 or target_base1", where));
            }
            o.de.strategy = strategy == "rand1" ? DeStrategy::rand1 : DeStrategy::target_base1;
        } else if (kind == "ga") {
            only_keys(j, where,
                      {"name", "kind", "population", "generations", "bounds", "crossover_rate", "mutation_rate",
                       "mutation_sigma", "tournament"});
            o.algorithm = Algorithm::ga;
            read(j, "crossover_rate", o.ga.crossover_rate, where);
            read(j, "mutation_rate", o.ga.mutation_rate, where);
            read(j, "mutation_sigma", o.ga.mutation_sigma, where);
            read(j, "tournament", o.ga.tournament, where);
        } else {
            only_keys(j, where,
                      {"name", "kind", "population", "generations", "bounds", "w", "c1", "c2", "v_min", "v_max",
                       "scale_to_range"});
            o.algorithm = Algorithm::pso;
            read(j, "w", o.pso.w, where);
            read(j, "c1", o.pso.c1, where);
            read(j, "c2", o.pso.c2, where);
            read(j, "v_min", o.pso.v_min, where);
            read(j, "v_max", o.pso.v_max, where);
            read(j, "scale_to_range", o.pso.scale_to_range, where);
        }
        read(j, "population", o.population, where);
        read(j, "generations", o.generations, where);
        read(j, "bounds", bounds, where);
        if (bounds != "clip" && bounds != "reflect") {
            throw ConfigError(fmt::format("{}: bounds must be clip or reflect", where));
        }
        o.bound_handling = bounds == "clip" ? BoundHandling::clip : BoundHandling::reflect;
    } else {
        throw ConfigError(fmt::format("{}: kind must be one of de, ga, pso, urs, lhs", where));
    }
    if (m.name.empty()) {
        throw ConfigError("every optimization method needs a name");
    }
    return m;
}

} // namespace

std::optional<Metric> metric_from_name(std::string_view name)
{
    const auto same = [](std::string_view a, std::string_view b) {
        return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                          [](char x, char y) { return std::tolower(static_cast<unsigned char>(x)) ==
                                                      std::tolower(static_cast<unsigned char>(y)); });
    };
    for (const auto m : all_metrics) {
        if (same(metric_name(m), name)) {
            return m;
        }
    }
    return std::nullopt;
}

std::vector<RosterEntry> default_roster()
{
    std::vector<RosterEntry> out;
    for (const auto& f : family_registry()) {
        if (f.implemented) {
            out.push_back({f.name, f.name, {}});
        }
    }
    return out;
}

std::vector<MethodSpec> default_methods()
{
    std::vector<MethodSpec> out;
    for (const auto& [name, algo] : {std::pair{"DE", Algorithm::de}, {"GA", Algorithm::ga}, {"PSO", Algorithm::pso}}) {
        MethodSpec m;
        m.name = name;
        m.optimizer.algorithm = algo;
        out.push_back(m);
    }
    MethodSpec urs;
    urs.name = "URS";
    urs.kind = MethodKind::uniform_sampling;
    out.push_back(urs);
    MethodSpec lhs;
    lhs.name = "LHC";
    lhs.kind = MethodKind::latin_hypercube;
    out.push_back(lhs);
    return out;
}

PipelineConfig PipelineConfig::defaults()
{
    PipelineConfig c;
    c.roster = default_roster();
    c.methods = default_methods();
    return c;
}

PipelineConfig PipelineConfig::from_json(const Json& j)
{
    PipelineConfig c = defaults();
    only_keys(j, "config",
              {"seed", "threads", "output_dir", "data", "clean", "stats", "compare", "model", "lof", "rfe", "optimize"});
    read(j, "seed", c.seed, "config");
    read(j, "threads", c.threads, "config");
    std::string out_dir = c.output_dir.string();
    read(j, "output_dir", out_dir, "config");
    c.output_dir = out_dir;

    const auto& data = section(j, "data");
    only_keys(data, "data", {"source", "csv", "schema", "synthetic"});
    read(data, "source", c.data_source, "data");
    std::string csv_path;
    std::string schema_path;
    read(data, "csv", csv_path, "data");
    read(data, "schema", schema_path, "data");
    c.csv_path = csv_path;
    c.schema_path = schema_path;
    const auto& synth = section(data, "synthetic");
    only_keys(synth, "data.synthetic", {"rows", "seed", "noise_std"});
    read(synth, "rows", c.synthetic_rows, "data.synthetic");
    read(synth, "seed", c.synthetic_seed, "data.synthetic");
    read(synth, "noise_std", c.synthetic_noise, "data.synthetic");

    const auto& clean = section(j, "clean");
    only_keys(clean, "clean", {"enabled"});
    read(clean, "enabled", c.clean_enabled, "clean");
    const auto& stats = section(j, "stats");
    only_keys(stats, "stats", {"bins"});
    read(stats, "bins", c.stats_bins, "stats");

    const auto& compare = section(j, "compare");
    only_keys(compare, "compare", {"folds", "metric", "roster"});
    read(compare, "folds", c.cv_folds, "compare");
    std::string metric = std::string(metric_name(c.rank_metric));
    read(compare, "metric", metric, "compare");
    const auto m = metric_from_name(metric);
    if (!m) {
        throw ConfigError(fmt::format("unknown ranking metric '{}'", metric));
    }
    c.rank_metric = *m;
    if (const auto it = compare.find("roster"); it != compare.end()) {
        if (!it->is_array()) {
            throw ConfigError("'compare.roster' must be an array");
        }
        c.roster.clear();
        for (const auto& e : *it) {
            RosterEntry r;
            if (e.is_string()) {
                r.family = e.get<std::string>();
            } else {
                only_keys(e, "compare.roster", {"name", "family", "hyperparameters"});
                read(e, "name", r.name, "compare.roster");
                read(e, "family", r.family, "compare.roster");
                if (const auto h = e.find("hyperparameters"); h != e.end()) {
                    if (!h->is_object()) {
                        throw ConfigError("roster hyperparameters must be an object");
                    }
                    for (const auto& [k, v] : h->items()) {
                        r.hyperparameters[k] = value_text(v);
                    }
                }
            }
            if (r.name.empty()) {
                r.name = r.family;
            }
            c.roster.push_back(std::move(r));
        }
    }

    const auto& model = section(j, "model");
    only_keys(model, "model", {"pinned", "best_of_refits", "refit_holdout"});
    read(model, "pinned", c.pinned_model, "model");
    read(model, "best_of_refits", c.best_of_refits, "model");
    read(model, "refit_holdout", c.refit_holdout, "model");

    const auto& lof = section(j, "lof");
    only_keys(lof, "lof", {"enabled", "k", "flag_fraction", "threshold", "min_improvement"});
    read(lof, "enabled", c.lof_enabled, "lof");
    read(lof, "k", c.lof_k, "lof");
    read(lof, "flag_fraction", c.lof_flag_fraction, "lof");
    if (const auto it = lof.find("threshold"); it != lof.end() && !it->is_null()) {
        double t = 0.0;
        read(lof, "threshold", t, "lof");
        c.lof_threshold = t;
    }
    read(lof, "min_improvement", c.lof_min_improvement, "lof");

    const auto& rfe = section(j, "rfe");
    only_keys(rfe, "rfe", {"enabled", "k_min", "k_max", "folds", "repeats", "holdout_fraction"});
    read(rfe, "enabled", c.rfe_enabled, "rfe");
    read(rfe, "k_min", c.rfe_k_min, "rfe");
    read(rfe, "k_max", c.rfe_k_max, "rfe");
    read(rfe, "folds", c.rfe_folds, "rfe");
    read(rfe, "repeats", c.rfe_repeats, "rfe");
    read(rfe, "holdout_fraction", c.rfe_holdout, "rfe");

    const auto& opt = section(j, "optimize");
    only_keys(opt, "optimize", {"enabled", "runs", "methods"});
    read(opt, "enabled", c.optimize_enabled, "optimize");
    read(opt, "runs", c.optimize_runs, "optimize");
    if (const auto it = opt.find("methods"); it != opt.end()) {
        if (!it->is_array()) {
            throw ConfigError("'optimize.methods' must be an array");
        }
        c.methods.clear();
        for (const auto& e : *it) {
            c.methods.push_back(method_from_json(e));
        }
    }
    c.validate();
    return c;
}

Json PipelineConfig::to_json() const
{
    Json roster_json = Json::array();
    for (const auto& r : roster) {
        Json h = Json::object();
        for (const auto& [k, v] : r.hyperparameters) {
            h[k] = v;
        }
        roster_json.push_back(Json{{"name", r.name}, {"family", r.family}, {"hyperparameters", std::move(h)}});
    }
    Json methods_json = Json::array();
    for (const auto& m : methods) {
        methods_json.push_back(method_to_json(m));
    }
    return Json{
        {"seed", seed},
        {"threads", threads},
        {"output_dir", output_dir.string()},
        {"data",
         {{"source", data_source},
          {"csv", csv_path.string()},
          {"schema", schema_path.string()},
          {"synthetic", {{"rows", synthetic_rows}, {"seed", synthetic_seed}, {"noise_std", synthetic_noise}}}}},
        {"clean", {{"enabled", clean_enabled}}},
        {"stats", {{"bins", stats_bins}}},
        {"compare", {{"folds", cv_folds}, {"metric", std::string(metric_name(rank_metric))}, {"roster", roster_json}}},
        {"model", {{"pinned", pinned_model}, {"best_of_refits", best_of_refits}, {"refit_holdout", refit_holdout}}},
        {"lof",
         {{"enabled", lof_enabled},
          {"k", lof_k},
          {"flag_fraction", lof_flag_fraction},
          {"threshold", lof_threshold ? Json(*lof_threshold) : Json(nullptr)},
          {"min_improvement", lof_min_improvement}}},
        {"rfe",
         {{"enabled", rfe_enabled},
          {"k_min", rfe_k_min},
          {"k_max", rfe_k_max},
          {"folds", rfe_folds},
          {"repeats", rfe_repeats},
          {"holdout_fraction", rfe_holdout}}},
        {"optimize", {{"enabled", optimize_enabled}, {"runs", optimize_runs}, {"methods", methods_json}}},
    };
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path)
{
    Json j;
    try {
        j = Json::parse(csv::read_text(path));
    } catch (const Json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return from_json(j);
}

std::string PipelineConfig::dump() const { return to_json().dump(2) + "\n"; }

void PipelineConfig::validate() const
{
    if (data_source != "synthetic" && data_source != "csv") {
        throw ConfigError("data.source must be 'synthetic' or 'csv'");
    }
    if (data_source == "csv" && (csv_path.empty() || schema_path.empty())) {
        throw ConfigError("csv data needs both data.csv and data.schema");
    }
    if (data_source == "synthetic" && synthetic_rows < 1) {
        throw ConfigError("synthetic data needs at least one row");
    }
    if (!(synthetic_noise >= 0.0)) {
        throw ConfigError("synthetic noise must be non-negative");
    }
    if (stats_bins < 1) {
        throw ConfigError("stats.bins must be positive");
    }
    if (cv_folds < 2) {
        throw ConfigError("compare.folds must be at least 2");
    }
    if (roster.empty()) {
        throw ConfigError("compare.roster is empty");
    }
    std::set<std::string> names;
    for (const auto& r : roster) {
        if (!names.insert(r.name).second) {
            throw ConfigError(fmt::format("duplicate roster name '{}'", r.name));
        }
        (void)resolve_params(RegressorSpec{r.family, r.hyperparameters, seed});
    }
    if (!pinned_model.empty() && names.count(pinned_model) == 0) {
        throw ConfigError(fmt::format("pinned model '{}' is not in the roster", pinned_model));
    }
    if (best_of_refits < 1 || !(refit_holdout > 0.0 && refit_holdout < 1.0)) {
        throw ConfigError("model.best_of_refits must be >= 1 and refit_holdout in (0, 1)");
    }
    if (lof_k < 1 || !(lof_flag_fraction >= 0.0 && lof_flag_fraction <= 1.0) || !(lof_min_improvement >= 0.0)) {
        throw ConfigError("lof settings out of range");
    }
    if (rfe_k_min < 1 || (rfe_k_max != 0 && rfe_k_max < rfe_k_min) || rfe_folds < 2 || rfe_repeats < 1 ||
        !(rfe_holdout > 0.0 && rfe_holdout < 1.0)) {
        throw ConfigError("rfe settings out of range");
    }
    if (optimize_enabled) {
        if (optimize_runs < 1 || methods.empty()) {
            throw ConfigError("optimize needs at least one run and one method");
        }
        std::set<std::string> method_names;
        for (const auto& m : methods) {
            if (!method_names.insert(m.name).second) {
                throw ConfigError(fmt::format("duplicate method name '{}'", m.name));
            }
            if (m.kind == MethodKind::optimizer) {
                m.optimizer.validate();
            } else if (m.samples < 1 || m.block < 1) {
                throw ConfigError(fmt::format("sampler '{}' needs positive samples and block", m.name));
            }
        }
    }
}

} // namespace sagopt
