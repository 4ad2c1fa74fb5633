#include "wbsig/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "wbsig/error.hpp"

namespace wbsig {

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  detail::require(lo <= hi, "uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t v = 0;
  do {
    v = engine_();
  } while (v >= limit);
  return lo + static_cast<std::int64_t>(v % span);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method: two deviates per accepted point in the unit disc.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

std::complex<double> Rng::complex_normal(double variance) {
  const double sigma = std::sqrt(variance / 2.0);
  const double re = normal();
  const double im = normal();
  return {sigma * re, sigma * im};
}

std::size_t Rng::weighted_index(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    detail::require(w >= 0.0, "weighted_index: negative weight");
    total += w;
  }
  detail::require(total > 0.0, "weighted_index: weights sum to zero");
  double target = uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (target < weights[i]) return i;
    target -= weights[i];
  }
  // Rounding can leave target marginally above the last bucket.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return 0;
}

Rng Rng::fork(std::uint64_t stream) const {
  // Copy the engine so forking is const; derive from a snapshot of its state.
  std::mt19937_64 probe = engine_;
  const std::uint64_t base = probe();
  return Rng(mix64(base ^ mix64(stream)));
}

}  // namespace wbsig
