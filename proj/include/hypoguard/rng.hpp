#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hypoguard {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of the named stream `name` (counter `index`) under `root`. Streams with
/// different names or indices are statistically independent, and adding a new
/// stream never shifts an existing one.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0) noexcept;

/// Root seed plus named-stream factory.
class RngStreams {
 public:
  explicit RngStreams(std::uint64_t root) : root_(root) {}

  std::uint64_t root() const noexcept { return root_; }
  Engine stream(std::string_view name) const { return Engine(derive_seed(root_, name)); }
  /// Independent root for replica `index`.
  RngStreams replica(std::uint64_t index) const { return RngStreams(derive_seed(root_, "replica", index)); }

 private:
  std::uint64_t root_;
};

inline double draw_exp1(Engine& rng) { return std::exponential_distribution<double>(1.0)(rng); }
inline double draw_uniform(Engine& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
inline double draw_normal(Engine& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

}  // namespace hypoguard
