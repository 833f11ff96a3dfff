#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sagopt/dataset.hpp"
#include "sagopt/matrix.hpp"
#include "sagopt/random.hpp"

namespace fixtures {

// Dataset over the given columns with names x0, x1, ... and bounds taken
// from the observed range.
[[nodiscard]] sagopt::Dataset make_dataset(const sagopt::Matrix& x, std::vector<double> y);

[[nodiscard]] sagopt::Matrix random_matrix(std::size_t n, std::size_t d, sagopt::Rng& rng, double lo = -1.0,
                                           double hi = 1.0);

// Smooth nonlinear target on the first three columns plus Gaussian noise.
[[nodiscard]] sagopt::Dataset random_regression(std::size_t n, std::size_t d, std::uint64_t seed,
                                                double noise = 0.1);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Header plus records of CSV text; blank lines are skipped.
[[nodiscard]] Table parse_table(const std::string& text);
[[nodiscard]] Table read_table(const std::filesystem::path& path);

// Fresh empty directory under the system temp dir.
[[nodiscard]] std::filesystem::path temp_dir(const std::string& name);

} // namespace fixtures
