#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sagopt/error.hpp"
#include "sagopt/pipeline/config.hpp"

namespace sagopt {

// A failure inside one pipeline stage; what() carries "<stage>: <cause>".
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause)
        : Error(stage + ": " + cause), stage_(std::move(stage)), cause_(cause) {}

    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }
    [[nodiscard]] const std::string& cause() const noexcept { return cause_; }

private:
    std::string stage_;
    std::string cause_;
};

enum class StageStatus { complete, incomplete, skipped };

[[nodiscard]] std::string_view stage_status_name(StageStatus s);

struct StageRecord {
    std::string name;
    StageStatus status = StageStatus::skipped;
    std::vector<std::string> artifacts; // relative to the output directory
    std::string error;
};

// Stage names in execution order.
inline const std::vector<std::string> pipeline_stages = {
    "data", "clean", "stats", "compare", "rank", "lof", "rfe", "train", "optimize", "report",
};

struct RunManifest {
    std::string config_hash; // FNV-1a of the serialized config
    std::string version;
    std::uint64_t seed = 0;
    std::string started; // UTC, ISO 8601
    std::string finished;
    std::filesystem::path output_dir;
    std::string rank_winner;  // argmin of the average ranks in rank.csv
    std::string chosen_model; // winner or the pinned roster entry
    std::vector<StageRecord> stages;

    [[nodiscard]] const StageRecord* stage(std::string_view name) const;
    [[nodiscard]] bool complete(std::string_view name) const;

    [[nodiscard]] std::string to_json() const;
    // output_dir is set to the manifest file's directory.
    [[nodiscard]] static RunManifest load(const std::filesystem::path& path);
};

[[nodiscard]] std::string config_hash(const PipelineConfig& config);

// Runs every enabled stage in order and writes manifest.json after each one.
// A failing stage is recorded as incomplete with whatever it had written and
// rethrown as StageError.
RunManifest run_pipeline(const PipelineConfig& config);

// Builds the plain-text report from the artifacts listed in the manifest.
// Sections whose stages are missing are left out and listed as missing.
[[nodiscard]] std::string build_report(const RunManifest& manifest);

// Writes report.txt into the output directory and returns its path.
std::filesystem::path emit_report(const RunManifest& manifest);

} // namespace sagopt
