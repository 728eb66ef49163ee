#include "liesynth/sampling.hpp"

#include "liesynth/error.hpp"

#include <algorithm>
#include <cmath>

namespace liesynth {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "Rng::below(0)");
  // Rejection sampling keeps the result unbiased and portable.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = 0;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

bool Interval::bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

Interval Interval::intersect(const Interval& other) const {
  return {std::max(lo, other.lo), std::min(hi, other.hi)};
}

void Domain::restrict(int component, const Interval& window) {
  if (component < 0) throw Error(ErrorCode::InvalidArgument, "negative component");
  auto k = static_cast<std::size_t>(component);
  if (k >= intervals_.size()) intervals_.resize(k + 1);
  intervals_[k] = intervals_[k].intersect(window);
}

Domain Domain::intersect(const Domain& other) const {
  Domain out = *this;
  for (int k = 0; k < other.dimension(); ++k) out.restrict(k, other.interval(k));
  return out;
}

bool Domain::contains(std::span<const double> point) const {
  for (std::size_t k = 0; k < intervals_.size() && k < point.size(); ++k) {
    if (!intervals_[k].contains(point[k])) return false;
  }
  return true;
}

bool Domain::is_whole_space() const {
  return std::all_of(intervals_.begin(), intervals_.end(), [](const Interval& i) {
    return std::isinf(i.lo) && std::isinf(i.hi);
  });
}

std::vector<double> Domain::sample(Rng& rng, double box, double interior) const {
  std::vector<double> z(intervals_.size());
  for (std::size_t k = 0; k < intervals_.size(); ++k) {
    const Interval& w = intervals_[k];
    double lo = std::isfinite(w.lo) ? w.lo : -box;
    double hi = std::isfinite(w.hi) ? w.hi : box;
    if (std::isfinite(w.lo) != std::isfinite(w.hi)) {
      // Half-bounded: sample a box-sized stretch next to the finite end.
      if (std::isfinite(w.lo)) hi = w.lo + 2.0 * box;
      else lo = w.hi - 2.0 * box;
    }
    double mid = 0.5 * (lo + hi);
    double half = 0.5 * (hi - lo) * (w.bounded() ? interior : 1.0);
    z[k] = rng.uniform(mid - half, mid + half);
  }
  return z;
}

}  // namespace liesynth
