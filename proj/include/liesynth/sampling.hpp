#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace liesynth {

/// Seedable generator with a portable output contract: std::mt19937_64 is
/// fully specified by the standard, and the conversions below avoid the
/// implementation-defined std:: distributions. Same seed, same stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// Open interval (lo, hi); infinite bounds mean no restriction.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool bounded() const;
  bool contains(double x) const { return x > lo && x < hi; }
  Interval intersect(const Interval& other) const;
};

/// Per-component validity windows for a synthesized identity. Components not
/// listed are unrestricted.
class Domain {
 public:
  Domain() = default;
  explicit Domain(int dimension) : intervals_(static_cast<std::size_t>(dimension)) {}

  int dimension() const { return static_cast<int>(intervals_.size()); }
  const Interval& interval(int component) const { return intervals_.at(static_cast<std::size_t>(component)); }
  void restrict(int component, const Interval& window);
  Domain intersect(const Domain& other) const;
  bool contains(std::span<const double> point) const;
  bool is_whole_space() const;

  /// Uniform sample: unrestricted components from [-box, box]; bounded windows
  /// from their central `interior` fraction (keeps samples off the poles).
  std::vector<double> sample(Rng& rng, double box = 2.0, double interior = 0.9) const;

 private:
  std::vector<Interval> intervals_;
};

}  // namespace liesynth
