#include "sagopt/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <optional>

#include <fmt/format.h>
#include <json.hpp>

#include "sagopt/csv.hpp"
#include "sagopt/parallel.hpp"
#include "sagopt/pipeline/stages.hpp"
#include "sagopt/stats.hpp"
#include "sagopt/synthetic.hpp"
#include "sagopt/version.hpp"

namespace sagopt {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::optional<StageStatus> status_from_name(std::string_view s)
{
    for (const auto st : {StageStatus::complete, StageStatus::incomplete, StageStatus::skipped}) {
        if (stage_status_name(st) == s) {
            return st;
        }
    }
    return std::nullopt;
}

void save_manifest(const RunManifest& m)
{
    csv::write_text(m.output_dir / "manifest.json", m.to_json());
}

} // namespace

std::string_view stage_status_name(StageStatus s)
{
    switch (s) {
    case StageStatus::complete:
        return "complete";
    case StageStatus::incomplete:
        return "incomplete";
    case StageStatus::skipped:
        return "skipped";
    }
    return "?";
}

const StageRecord* RunManifest::stage(std::string_view name) const
{
    for (const auto& s : stages) {
        if (s.name == name) {
            return &s;
        }
    }
    return nullptr;
}

bool RunManifest::complete(std::string_view name) const
{
    const auto* s = stage(name);
    return s != nullptr && s->status == StageStatus::complete;
}

std::string RunManifest::to_json() const
{
    Json st = Json::array();
    for (const auto& s : stages) {
        st.push_back(Json{{"name", s.name},
                          {"status", std::string(stage_status_name(s.status))},
                          {"artifacts", s.artifacts},
                          {"error", s.error}});
    }
    const Json j{{"format", "sagopt-manifest"},
                 {"toolkit_version", version},
                 {"config_hash", config_hash},
                 {"seed", seed},
                 {"started", started},
                 {"finished", finished},
                 {"rank_winner", rank_winner},
                 {"chosen_model", chosen_model},
                 {"stages", st}};
    return j.dump(2) + "\n";
}

RunManifest RunManifest::load(const fs::path& path)
{
    RunManifest m;
    try {
        const Json j = Json::parse(csv::read_text(path));
        if (j.value("format", "") != "sagopt-manifest") {
            throw ConfigError(fmt::format("{} is not a run manifest", path.string()));
        }
        m.version = j.at("toolkit_version").get<std::string>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.started = j.at("started").get<std::string>();
        m.finished = j.at("finished").get<std::string>();
        m.rank_winner = j.at("rank_winner").get<std::string>();
        m.chosen_model = j.at("chosen_model").get<std::string>();
        for (const auto& s : j.at("stages")) {
            StageRecord r;
            r.name = s.at("name").get<std::string>();
            const auto st = status_from_name(s.at("status").get<std::string>());
            if (!st) {
                throw ConfigError(fmt::format("{}: unknown stage status", path.string()));
            }
            r.status = *st;
            r.artifacts = s.at("artifacts").get<std::vector<std::string>>();
            r.error = s.at("error").get<std::string>();
            m.stages.push_back(std::move(r));
        }
    } catch (const Json::exception& e) {
        throw ConfigError(fmt::format("{}: malformed manifest: {}", path.string(), e.what()));
    }
    m.output_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    return m;
}

std::string config_hash(const PipelineConfig& config)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : config.dump()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return fmt::format("{:016x}", h);
}

RunManifest run_pipeline(const PipelineConfig& config)
{
    config.validate();
    if (config.threads != 0) {
        set_thread_count(config.threads);
    }
    const fs::path& out = config.output_dir;
    fs::create_directories(out);

    RunManifest manifest;
    manifest.config_hash = config_hash(config);
    manifest.version = std::string(toolkit_version);
    manifest.seed = config.seed;
    manifest.started = utc_now();
    manifest.output_dir = out;

    const auto run = [&](const std::string& name, bool enabled, const auto& body) {
        StageRecord rec{name, StageStatus::skipped, {}, {}};
        if (enabled) {
            try {
                body(rec.artifacts);
                rec.status = StageStatus::complete;
            } catch (const std::exception& e) {
                rec.status = StageStatus::incomplete;
                rec.error = e.what();
                manifest.stages.push_back(std::move(rec));
                manifest.finished = utc_now();
                save_manifest(manifest);
                throw StageError(name, e.what());
            }
        }
        manifest.stages.push_back(std::move(rec));
        save_manifest(manifest);
    };

    std::optional<Dataset> data;
    std::optional<RegressorSpec> chosen_spec;
    std::optional<FittedModel> model;

    run("data", true, [&](stages::Written& w) {
        stages::write_artifact(out, "config.json", config.dump(), w);
        data = config.data_source == "csv"
                   ? stages::load_dataset(config.csv_path, config.schema_path)
                   : generate_synthetic_mill(config.synthetic_rows, config.synthetic_seed, config.synthetic_noise);
        stages::write_dataset(*data, out, "raw", w);
    });
    run("clean", config.clean_enabled, [&](stages::Written& w) { data = stages::clean_stage(*data, out, w).data; });
    run("stats", true, [&](stages::Written& w) { (void)stages::stats_stage(*data, config.stats_bins, out, w); });

    std::vector<CrossValidation> results;
    run("compare", true, [&](stages::Written& w) {
        results = stages::compare_stage(*data, config.roster, config.cv_folds, config.seed, out, w);
    });
    run("rank", true, [&](stages::Written& w) {
        std::vector<std::string> names;
        for (const auto& r : results) {
            names.push_back(r.label);
        }
        const auto report =
            stages::rank_stage(names, stages::fold_scores(results, config.rank_metric), config.rank_metric, out, w);
        manifest.rank_winner = names[report.best];
        manifest.chosen_model = config.pinned_model.empty() ? manifest.rank_winner : config.pinned_model;
        const auto entry = std::find_if(config.roster.begin(), config.roster.end(),
                                        [&](const RosterEntry& e) { return e.name == manifest.chosen_model; });
        chosen_spec = stages::roster_spec(*entry, config.seed);
    });
    run("lof", config.lof_enabled, [&](stages::Written& w) {
        data = stages::lof_stage(*data, *chosen_spec, config.lof_k, config.lof_flag_fraction, config.lof_threshold,
                                 config.lof_min_improvement, config.cv_folds, config.seed, out, w)
                   .data;
    });
    run("rfe", config.rfe_enabled, [&](stages::Written& w) {
        const RfeOptions options{config.rfe_repeats, config.rfe_holdout};
        const auto outcome = stages::rfe_stage(*data, *chosen_spec, config.rfe_k_min, config.rfe_k_max,
                                               config.rfe_folds, options, config.seed, out, w);
        data = data->select_features(outcome.selected);
    });
    run("train", true, [&](stages::Written& w) {
        model = stages::train_stage(*data, *chosen_spec, config.best_of_refits, config.refit_holdout, config.seed, out,
                                    w)
                    .model;
    });
    run("optimize", config.optimize_enabled, [&](stages::Written& w) {
        (void)stages::optimize_stage(*model, data->schema(), config.methods, config.optimize_runs, config.seed, out,
                                     w);
    });
    run("report", true, [&](stages::Written& w) {
        emit_report(manifest);
        w.emplace_back("report.txt");
    });
    manifest.finished = utc_now();
    save_manifest(manifest);
    return manifest;
}

namespace {

struct ReportSection {
    std::string title;
    std::vector<std::string> needs;
};

const std::vector<ReportSection>& report_sections()
{
    static const std::vector<ReportSection> sections = {
        {"Descriptive statistics", {"stats"}},
        {"Model ranking", {"compare", "rank"}},
        {"Chosen model", {"compare", "rank"}},
        {"Feature selection", {"rfe"}},
        {"Optimizer comparison", {"optimize"}},
        {"Candidate solutions", {"optimize"}},
    };
    return sections;
}

std::string read_artifact(const RunManifest& m, const std::string& name)
{
    return csv::read_text(m.output_dir / name);
}

std::vector<std::vector<std::string>> read_rows(const RunManifest& m, const std::string& name)
{
    std::vector<std::vector<std::string>> rows;
    const std::string text = read_artifact(m, name);
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) {
            end = text.size();
        }
        if (end > start) {
            rows.push_back(csv::split_line(std::string_view(text).substr(start, end - start)));
        }
        start = end + 1;
    }
    return rows;
}

std::string chosen_model_section(const RunManifest& m)
{
    std::string out = fmt::format("Model: {}\n", m.chosen_model);
    out += m.chosen_model == m.rank_winner ? "Selected as the average-rank winner.\n"
                                           : fmt::format("Pinned by configuration (rank winner: {}).\n",
                                                         m.rank_winner);
    const auto rows = read_rows(m, "compare/fold_metrics.csv");
    const auto& header = rows.front();
    const auto col = static_cast<std::size_t>(std::find(header.begin(), header.end(), "R2") - header.begin());
    std::vector<double> r2;
    std::string per_fold;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i][0] != m.chosen_model || col >= rows[i].size()) {
            continue;
        }
        const auto v = csv::parse_real(rows[i][col]);
        per_fold += fmt::format("  fold {:>2}: {}\n", rows[i][1], v ? fmt::format("{:.6f}", *v) : "undefined");
        if (v) {
            r2.push_back(*v);
        }
    }
    out += "\nCross-validated R2 by fold:\n" + per_fold;
    if (!r2.empty()) {
        out += fmt::format("\nR2 distribution: min {:.6f}  q1 {:.6f}  median {:.6f}  q3 {:.6f}  max {:.6f}\n",
                           quantile(r2, 0.0), quantile(r2, 0.25), quantile(r2, 0.5), quantile(r2, 0.75),
                           quantile(r2, 1.0));
    }
    if (m.complete("lof")) {
        out += "\nOutlier study (local outlier factor):\n" + read_artifact(m, "lof.txt");
    }
    if (m.complete("train")) {
        out += "\nTrained model:\n" + read_artifact(m, "model_info.txt");
    }
    return out;
}

std::string candidates_section(const RunManifest& m)
{
    const auto rows = read_rows(m, "optimize/candidates.csv");
    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) {
            std::string cell = r[c];
            if (const auto v = csv::parse_real(cell); v && &r != &rows.front()) {
                cell = fmt::format("{:.4f}", *v);
            }
            width[c] = std::max(width[c], cell.size());
        }
    }
    std::string out = fmt::format("{} candidate solutions, best first.\n\n", rows.size() - 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out += fmt::format("{:>4}", i == 0 ? std::string("#") : std::to_string(i));
        for (std::size_t c = 0; c < rows[i].size() && c < width.size(); ++c) {
            std::string cell = rows[i][c];
            if (const auto v = csv::parse_real(cell); v && i > 0) {
                cell = fmt::format("{:.4f}", *v);
            }
            out += fmt::format("  {:>{}}", cell, width[c]);
        }
        out += '\n';
    }
    return out;
}

} // namespace

std::string build_report(const RunManifest& m)
{
    std::vector<std::string> missing;
    for (const auto& s : report_sections()) {
        if (!std::all_of(s.needs.begin(), s.needs.end(), [&](const std::string& n) { return m.complete(n); })) {
            missing.push_back(s.title);
        }
    }
    std::string out = "SAG mill throughput study\n=========================\n\n";
    out += fmt::format("Toolkit version: {}\nConfig hash: {}\nMaster seed: {}\n", m.version, m.config_hash, m.seed);
    if (missing.empty()) {
        out += "Status: complete\n";
    } else {
        out += "Status: PARTIAL\nMissing sections:\n";
        for (const auto& t : missing) {
            out += "  - " + t + "\n";
        }
    }
    std::size_t number = 0;
    for (const auto& s : report_sections()) {
        if (std::find(missing.begin(), missing.end(), s.title) != missing.end()) {
            continue;
        }
        std::string body;
        if (s.title == "Descriptive statistics") {
            body = read_artifact(m, "stats.txt");
        } else if (s.title == "Model ranking") {
            body = read_artifact(m, "rank.txt");
        } else if (s.title == "Chosen model") {
            body = chosen_model_section(m);
        } else if (s.title == "Feature selection") {
            body = read_artifact(m, "rfe.txt");
        } else if (s.title == "Optimizer comparison") {
            body = read_artifact(m, "optimize/summary.txt");
        } else {
            body = candidates_section(m);
        }
        const std::string heading = fmt::format("{}. {}", ++number, s.title);
        out += fmt::format("\n{}\n{}\n\n{}", heading, std::string(heading.size(), '-'), body);
    }
    return out;
}

fs::path emit_report(const RunManifest& manifest)
{
    const fs::path path = manifest.output_dir / "report.txt";
    csv::write_text(path, build_report(manifest));
    return path;
}

} // namespace sagopt
