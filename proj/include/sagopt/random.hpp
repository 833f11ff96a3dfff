#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace sagopt {

using Rng = std::mt19937_64;

// Derive an independent stream seed from a master seed and a path of stream
// identifiers (method id, run index, tree index, ...). Uses the splitmix64
// finalizer so neighbouring identifiers give unrelated streams.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

[[nodiscard]] inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path)
{
    return Rng(derive_seed(master, path));
}

// Uniform in [0, 1).
[[nodiscard]] inline double uniform01(Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Uniform integer in [0, n).
[[nodiscard]] inline std::size_t uniform_index(Rng& rng, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// 0..n-1 in a seeded random order.
[[nodiscard]] std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

} // namespace sagopt
