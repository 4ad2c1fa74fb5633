#include <algorithm>
#include <cmath>
#include <numbers>

#include "wbsig/dsp.hpp"
#include "wbsig/error.hpp"
#include "wbsig/rng.hpp"

namespace wbsig::dsp {

Samples frequency_translate(std::span<const Complex> x, double f0) {
  detail::require(std::abs(f0) < 1.0, "frequency_translate: |f0| must be < 1");
  Samples out(x.begin(), x.end());
  if (f0 == 0.0) return out;
  // Exact phasor at the start of each block, recurrence within it; the
  // recurrence drifts by a few ulps per block at most.
  constexpr std::size_t kBlock = 256;
  const auto phasor = [f0](std::size_t n) {
    const double cycles = f0 * static_cast<double>(n);
    const double phase = 2.0 * std::numbers::pi * (cycles - std::floor(cycles));
    return Complex(std::cos(phase), std::sin(phase));
  };
  const Complex step = phasor(1);
  for (std::size_t start = 0; start < out.size(); start += kBlock) {
    Complex w = phasor(start);
    const std::size_t stop = std::min(out.size(), start + kBlock);
    for (std::size_t n = start; n < stop; ++n) {
      const Complex v = out[n];
      out[n] = Complex(v.real() * w.real() - v.imag() * w.imag(), v.real() * w.imag() + v.imag() * w.real());
      const double re = w.real() * step.real() - w.imag() * step.imag();
      w = Complex(re, w.real() * step.imag() + w.imag() * step.real());
    }
  }
  return out;
}

double mean_power(std::span<const Complex> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  return acc / static_cast<double>(x.size());
}

BandMeasurement measure_band(std::span<const Complex> x, SampleRange span, FrequencyBand band) {
  detail::require(span.begin < span.end && span.end <= x.size(),
                  "measure_power: sample range is empty or outside the buffer");
  detail::require(band.low < band.high, "measure_power: frequency band is empty");
  const std::size_t m = span.end - span.begin;
  Samples spectrum(x.begin() + static_cast<std::ptrdiff_t>(span.begin),
                   x.begin() + static_cast<std::ptrdiff_t>(span.end));
  fft(spectrum);
  double acc = 0.0;
  std::size_t bins = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double f = bin_frequency(k, m);
    if (f >= band.low && f < band.high) {
      acc += std::norm(spectrum[k]);
      ++bins;
    }
  }
  detail::require(bins > 0, "measure_power: no FFT bins fall inside the band");
  const double mm = static_cast<double>(m);
  return {acc / (mm * mm), bins, m};
}

double measure_power(std::span<const Complex> x, std::optional<SampleRange> span,
                     std::optional<FrequencyBand> band) {
  const SampleRange range = span.value_or(SampleRange{0, x.size()});
  if (!band) {
    detail::require(range.begin < range.end && range.end <= x.size(),
                    "measure_power: sample range is empty or outside the buffer");
    return mean_power(x.subspan(range.begin, range.end - range.begin));
  }
  return measure_band(x, range, *band).power;
}

void require_finite(std::span<const Complex> x, const char* what) {
  for (const auto& v : x) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw ParameterError(std::string(what) + ": non-finite sample");
    }
  }
}

Samples complex_noise(std::size_t n, double variance, Rng& rng) {
  Samples out(n);
  if (variance <= 0.0) return out;
  const double sigma = std::sqrt(variance / 2.0);
  for (auto& v : out) {
    const double re = rng.normal();
    const double im = rng.normal();
    v = Complex(sigma * re, sigma * im);
  }
  return out;
}

}  // namespace wbsig::dsp
