#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "wbsig/dsp.hpp"
#include "wbsig/error.hpp"

namespace wbsig::dsp {
namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

double rrc_tap(double t, double beta) {
  // t in symbol periods.
  if (std::abs(t) < 1e-12) return 1.0 - beta + 4.0 * beta / kPi;
  if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
    return beta / std::numbers::sqrt2 *
           ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * beta)) +
            (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * beta)));
  }
  const double num = std::sin(kPi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
  const double den = kPi * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
  return num / den;
}

template <typename Tap>
Samples convolve_direct(std::span<const Complex> x, std::span<const Tap> h, std::size_t first,
                        std::size_t count) {
  // Computes full[first .. first + count) where full[i] = sum_k h[k] x[i - k].
  Samples out(count);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto m = static_cast<std::ptrdiff_t>(h.size());
  for (std::size_t j = 0; j < count; ++j) {
    const auto i = static_cast<std::ptrdiff_t>(first + j);
    const auto k_lo = std::max<std::ptrdiff_t>(0, i - n + 1);
    const auto k_hi = std::min<std::ptrdiff_t>(m - 1, i);
    Complex acc{0.0, 0.0};
    for (auto k = k_lo; k <= k_hi; ++k) acc += h[k] * x[i - k];
    out[j] = acc;
  }
  return out;
}

template <typename Tap>
Samples convolve_fft(std::span<const Complex> x, std::span<const Tap> h, std::size_t first,
                     std::size_t count) {
  const std::size_t full = x.size() + h.size() - 1;
  std::size_t n = 1;
  while (n < full) n <<= 1;
  Samples a(n), b(n);
  std::copy(x.begin(), x.end(), a.begin());
  for (std::size_t k = 0; k < h.size(); ++k) b[k] = Complex(h[k]);
  fft(a);
  fft(b);
  for (std::size_t k = 0; k < n; ++k) a[k] *= b[k];
  ifft(a);
  return Samples(a.begin() + static_cast<std::ptrdiff_t>(first),
                 a.begin() + static_cast<std::ptrdiff_t>(first + count));
}

template <typename Tap>
Samples convolve_impl(std::span<const Complex> x, std::span<const Tap> h, ConvolveMode mode) {
  detail::require(!h.empty(), "convolve: empty filter");
  if (x.empty()) return {};
  std::size_t first = 0;
  std::size_t count = x.size();
  switch (mode) {
    case ConvolveMode::Full: count = x.size() + h.size() - 1; break;
    case ConvolveMode::Same: first = (h.size() - 1) / 2; break;
    case ConvolveMode::Causal: break;
  }
  // Direct form wins for short filters; the crossover is roughly where the
  // per-sample tap count exceeds a few log2(N) FFT butterflies.
  if (h.size() > 96 && x.size() > 4096) return convolve_fft(x, h, first, count);
  return convolve_direct(x, h, first, count);
}

}  // namespace

double kaiser_beta(double a) {
  if (a > 50.0) return 0.1102 * (a - 8.7);
  if (a >= 21.0) return 0.5842 * std::pow(a - 21.0, 0.4) + 0.07886 * (a - 21.0);
  return 0.0;
}

std::size_t kaiser_length(double attenuation_db, double transition_width) {
  detail::require(transition_width > 0.0, "kaiser_length: transition width must be positive");
  const double n = (attenuation_db - 8.0) / (2.285 * 2.0 * kPi * transition_width);
  auto taps = static_cast<std::size_t>(std::ceil(std::max(n, 1.0))) + 1;
  if (taps % 2 == 0) ++taps;
  return taps;
}

std::vector<double> kaiser_window(std::size_t n, double beta) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double denom = std::cyl_bessel_i(0.0, beta);
  for (std::size_t k = 0; k < n; ++k) {
    const double r = 2.0 * static_cast<double>(k) / static_cast<double>(n - 1) - 1.0;
    w[k] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
  }
  return w;
}

std::vector<double> blackman_harris(std::size_t n) {
  constexpr double a0 = 0.35875, a1 = 0.48829, a2 = 0.14128, a3 = 0.01168;
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    w[k] = a0 - a1 * std::cos(x) + a2 * std::cos(2.0 * x) - a3 * std::cos(3.0 * x);
  }
  return w;
}

std::vector<double> design_filter(const FilterSpec& spec) {
  detail::require(spec.num_taps >= 1 && spec.num_taps % 2 == 1,
                  "design_filter: num_taps must be odd and positive");
  const std::size_t n = spec.num_taps;
  const double mid = static_cast<double>(n - 1) / 2.0;
  std::vector<double> taps(n);

  switch (spec.kind) {
    case FilterKind::Lowpass: {
      detail::require(spec.rate > 0.0 && spec.rate <= 0.5, "design_filter: cutoff must be in (0, 0.5]");
      const auto window = kaiser_window(n, kaiser_beta(spec.attenuation_db));
      for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) - mid;
        taps[k] = 2.0 * spec.rate * sinc(2.0 * spec.rate * t) * window[k];
      }
      const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
      for (auto& t : taps) t /= sum;
      break;
    }
    case FilterKind::RootRaisedCosine: {
      detail::require(spec.rate > 0.0 && spec.rate <= 1.0, "design_filter: symbol rate must be in (0, 1]");
      detail::require(spec.shape >= 0.0 && spec.shape <= 1.0, "design_filter: roll-off must be in [0, 1]");
      for (std::size_t k = 0; k < n; ++k) {
        taps[k] = rrc_tap((static_cast<double>(k) - mid) * spec.rate, spec.shape);
      }
      double energy = 0.0;
      for (double t : taps) energy += t * t;
      const double scale = 1.0 / std::sqrt(energy);
      for (auto& t : taps) t *= scale;
      break;
    }
    case FilterKind::Gaussian: {
      detail::require(spec.rate > 0.0 && spec.rate <= 1.0, "design_filter: symbol rate must be in (0, 1]");
      detail::require(spec.shape > 0.0, "design_filter: BT product must be positive");
      // sigma in samples: sqrt(ln 2) / (2 pi BT) symbol periods.
      const double sigma = std::sqrt(std::numbers::ln2) / (2.0 * kPi * spec.shape) / spec.rate;
      for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) - mid;
        taps[k] = std::exp(-t * t / (2.0 * sigma * sigma));
      }
      const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
      for (auto& t : taps) t /= sum;
      break;
    }
  }
  return taps;
}

Samples convolve(std::span<const Complex> x, std::span<const double> taps, ConvolveMode mode) {
  return convolve_impl(x, taps, mode);
}

Samples convolve(std::span<const Complex> x, std::span<const Complex> taps, ConvolveMode mode) {
  return convolve_impl(x, taps, mode);
}

}  // namespace wbsig::dsp
