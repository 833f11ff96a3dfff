#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sagopt::csv {

// Splits one CSV record on commas. Fields may be wrapped in double quotes
// (with "" as an escaped quote); surrounding whitespace is trimmed.
[[nodiscard]] std::vector<std::string> split_line(std::string_view line);

// Full-string real parse; nullopt on any trailing garbage or empty text.
[[nodiscard]] std::optional<double> parse_real(std::string_view text);

// Shortest round-trip decimal representation; identical across runs.
[[nodiscard]] std::string format_real(double value);

// Quotes a field only when it contains a comma, quote, or newline.
[[nodiscard]] std::string escape(std::string_view field);

[[nodiscard]] std::string join(const std::vector<std::string>& fields);

void write_text(const std::filesystem::path& path, std::string_view content);
[[nodiscard]] std::string read_text(const std::filesystem::path& path);

} // namespace sagopt::csv
