#pragma once

#include <filesystem>
#include <string>

#include "sagopt/models/regressor.hpp"

namespace sagopt {

// Self-describing JSON text: format tag, version, spec, feature names and the
// family internals. Doubles round-trip exactly, so a reloaded model predicts
// bit-identically.
[[nodiscard]] std::string save_model(const FittedModel& model);
[[nodiscard]] FittedModel load_model(const std::string& text);

void save_model_file(const FittedModel& model, const std::filesystem::path& path);
[[nodiscard]] FittedModel load_model_file(const std::filesystem::path& path);

// Human-readable description: family, seed, resolved hyperparameters,
// features, internals summary and warnings.
[[nodiscard]] std::string model_info(const FittedModel& model);

} // namespace sagopt
