#include "qcdmdp/random.hpp"

#include <algorithm>

#include "qcdmdp/error.hpp"

namespace qcdmdp {

Engine make_engine(std::uint64_t master_seed, std::uint64_t run_id, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(run_id), static_cast<std::uint32_t>(run_id >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Engine(seq);
}

std::size_t uniform_index(Engine& engine, std::size_t n) {
  if (n == 0) throw ArgumentError("uniform_index over an empty range");
  const auto i = static_cast<std::size_t>(uniform01(engine) * static_cast<double>(n));
  return std::min(i, n - 1);
}

std::vector<double> cumulative(std::span<const double> pmf) {
  std::vector<double> cdf(pmf.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    total += pmf[i];
    cdf[i] = total;
  }
  if (!cdf.empty()) cdf.back() = 1.0;
  return cdf;
}

std::size_t sample_index(std::span<const double> cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) return cdf.size() - 1;
  return static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace qcdmdp
