#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sagopt/csv.hpp"

namespace fixtures {

sagopt::Dataset make_dataset(const sagopt::Matrix& x, std::vector<double> y)
{
    sagopt::Schema schema;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const auto col = x.column(j);
        const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        schema.features.push_back({"x" + std::to_string(j), "-", *lo, *hi});
    }
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    schema.target = {"y", "-", *lo, *hi};
    return {schema, x, std::move(y)};
}

sagopt::Matrix random_matrix(std::size_t n, std::size_t d, sagopt::Rng& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    sagopt::Matrix x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            x(i, j) = u(rng);
        }
    }
    return x;
}

sagopt::Dataset random_regression(std::size_t n, std::size_t d, std::uint64_t seed, double noise)
{
    auto rng = sagopt::make_rng(seed, {0x74657374});
    const auto x = random_matrix(n, d, rng);
    std::normal_distribution<double> eps(0.0, noise);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = x(i, 0);
        const double b = d > 1 ? x(i, 1) : 0.0;
        const double c = d > 2 ? x(i, 2) : 0.0;
        y[i] = 3.0 * std::sin(2.0 * a) + 2.0 * b * b - c + (noise > 0.0 ? eps(rng) : 0.0);
    }
    return make_dataset(x, std::move(y));
}

std::filesystem::path temp_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "sagopt-tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

Table parse_table(const std::string& text)
{
    Table t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto fields = sagopt::csv::split_line(line);
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    return t;
}

Table read_table(const std::filesystem::path& path) { return parse_table(sagopt::csv::read_text(path)); }

} // namespace fixtures
