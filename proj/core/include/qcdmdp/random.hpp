#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace qcdmdp {

using Engine = std::mt19937_64;

// Independent random streams of one episode. Keeping them separate lets
// different policies share change points and dynamics draws (common random
// numbers) even though they consume policy randomness differently.
enum class Stream : std::uint64_t { change_point = 1, dynamics = 2, policy = 3 };

/// Engine for (master seed, run id, stream), seeded through std::seed_seq so the
/// sequence is identical on every conforming standard library.
Engine make_engine(std::uint64_t master_seed, std::uint64_t run_id, Stream stream);

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n).
std::size_t uniform_index(Engine& engine, std::size_t n);

/// Running sums of a pmf; the last entry is forced to 1.
std::vector<double> cumulative(std::span<const double> pmf);

/// Inverse-CDF lookup: smallest i with u < cdf[i].
std::size_t sample_index(std::span<const double> cdf, double u);

}  // namespace qcdmdp
