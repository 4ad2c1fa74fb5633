#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <utility>

#include "wbsig/dsp.hpp"
#include "wbsig/error.hpp"

namespace wbsig::dsp {
namespace {

constexpr std::size_t kPhases = 256;

// Prototype h(t) = 2c sinc(2ct) w(t/K), tabulated at kPhases + 1 fractional
// offsets. Row p holds the 2K taps used when the output instant lies p/kPhases
// of an input sample past x[i0]; rows are linearly interpolated between.
struct PolyphaseTable {
  std::size_t half_length = 0;  // K
  std::vector<double> taps;     // (kPhases + 1) x 2K

  const double* row(std::size_t p) const { return taps.data() + p * 2 * half_length; }
};

std::shared_ptr<const PolyphaseTable> build_table(double cutoff, double transition,
                                                  double attenuation_db) {
  auto table = std::make_shared<PolyphaseTable>();
  const std::size_t length = kaiser_length(attenuation_db, transition);
  const std::size_t half = (length + 1) / 2;
  table->half_length = half;
  table->taps.resize((kPhases + 1) * 2 * half);
  const double beta = kaiser_beta(attenuation_db);
  const double norm = std::cyl_bessel_i(0.0, beta);
  const double k = static_cast<double>(half);
  for (std::size_t p = 0; p <= kPhases; ++p) {
    const double mu = static_cast<double>(p) / static_cast<double>(kPhases);
    for (std::size_t j = 0; j < 2 * half; ++j) {
      const double t = mu + k - 1.0 - static_cast<double>(j);
      const double u = t / k;
      double value = 0.0;
      if (std::abs(u) <= 1.0) {
        const double arg = 2.0 * cutoff * t;
        const double s = std::abs(arg) < 1e-12 ? 1.0
                                               : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
        value = 2.0 * cutoff * s * std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - u * u)) / norm;
      }
      table->taps[p * 2 * half + j] = value;
    }
  }
  return table;
}

std::shared_ptr<const PolyphaseTable> table_for(double scale, double attenuation_db) {
  // Tables depend only on (scale, attenuation); most calls use scale == 1.
  thread_local std::map<std::pair<double, double>, std::shared_ptr<const PolyphaseTable>> cache;
  const auto key = std::make_pair(scale, attenuation_db);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  if (cache.size() > 32) cache.clear();
  auto table = build_table(0.5 * scale, 0.2 * scale, attenuation_db);
  cache.emplace(key, table);
  return table;
}

}  // namespace

Samples resample(std::span<const Complex> x, double rate, const ResampleOptions& options) {
  detail::require(std::isfinite(rate) && rate > 0.0, "resample: rate must be positive");
  if (x.empty()) return {};
  if (rate == 1.0) return Samples(x.begin(), x.end());
  if (options.occupied_half_band && rate < 1.0) {
    if (*options.occupied_half_band > 0.5 * rate) {
      throw ParameterError("resample: content above the new Nyquist rate would alias; pre-filter first");
    }
  }

  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(x.size()) * rate));
  Samples out(out_len);
  if (out_len == 0) return out;

  const double scale = std::min(1.0, rate);
  const auto table = table_for(scale, options.attenuation_db);
  const auto half = static_cast<std::ptrdiff_t>(table->half_length);
  const auto width = static_cast<std::size_t>(2 * half);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> taps(width);

  for (std::size_t m = 0; m < out_len; ++m) {
    const double tau = static_cast<double>(m) / rate;
    const double base = std::floor(tau);
    const double pos = (tau - base) * static_cast<double>(kPhases);
    auto p = static_cast<std::size_t>(pos);
    if (p >= kPhases) p = kPhases - 1;
    const double w = pos - static_cast<double>(p);
    const double* r0 = table->row(p);
    const double* r1 = table->row(p + 1);
    const auto first = static_cast<std::ptrdiff_t>(base) - half + 1;

    Complex acc{0.0, 0.0};
    if (first >= 0 && first + static_cast<std::ptrdiff_t>(width) <= n) {
      const Complex* xs = x.data() + first;
      for (std::size_t j = 0; j < width; ++j) acc += (r0[j] + w * (r1[j] - r0[j])) * xs[j];
    } else {
      for (std::size_t j = 0; j < width; ++j) {
        const auto idx = first + static_cast<std::ptrdiff_t>(j);
        if (idx < 0 || idx >= n) continue;
        acc += (r0[j] + w * (r1[j] - r0[j])) * x[static_cast<std::size_t>(idx)];
      }
    }
    out[m] = acc;
  }
  return out;
}

}  // namespace wbsig::dsp
