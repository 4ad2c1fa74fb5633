#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

#include "wbsig/error.hpp"
#include "wbsig/impairments.hpp"
#include "wbsig/rng.hpp"

namespace wbsig::impair {
namespace {

constexpr double kPi = std::numbers::pi;
// Scaled boxes must keep their outer edge inside this |f|.
constexpr double kResampleEdge = 0.45;

// Adds noise of the given PSD to the FFT bins selected by `keep`.
void add_band_noise(Samples& x, double psd, const std::function<bool(double)>& keep, Rng& rng) {
  Samples noise = dsp::complex_noise(x.size(), psd, rng);
  dsp::fft(noise);
  for (std::size_t k = 0; k < noise.size(); ++k) {
    if (!keep(dsp::bin_frequency(k, noise.size()))) noise[k] = 0.0;
  }
  dsp::ifft(noise);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += noise[i];
}

void fill_noise(Samples& x, std::size_t begin, std::size_t end, double psd, Rng& rng) {
  if (end <= begin) return;
  const Samples noise = dsp::complex_noise(end - begin, psd, rng);
  std::copy(noise.begin(), noise.end(), x.begin() + static_cast<std::ptrdiff_t>(begin));
}

// Clips a box's time extent to [0, 1]; false when nothing is left.
bool clip_time(SignalAnnotation& a) {
  const double t0 = std::max(0.0, a.t_start);
  const double t1 = std::min(1.0, a.t_stop());
  if (t1 - t0 <= 1e-12) return false;
  a.t_start = t0;
  a.duration = t1 - t0;
  return true;
}

bool clip_frequency(SignalAnnotation& a) {
  const double lo = std::max(-0.5, a.f_low());
  const double hi = std::min(0.5, a.f_high());
  if (hi - lo <= 1e-12) return false;
  a.f_center = 0.5 * (lo + hi);
  a.bandwidth = hi - lo;
  return true;
}

// Upsample by 2 via spectral zero-padding, translate by f0/2, low-pass with
// the stopband edge at a quarter of the new rate, then keep even samples.
Samples shift_without_wrap(const Samples& x, double f0) {
  const std::size_t n = x.size();
  Samples spectrum(x);
  dsp::fft(spectrum);
  Samples up(2 * n);
  const std::size_t half = (n + 1) / 2;  // bins [0, half) are non-negative
  for (std::size_t k = 0; k < n; ++k) up[k < half ? k : k + n] = spectrum[k];
  dsp::ifft(up);
  for (auto& v : up) v *= 2.0;

  const Samples moved = dsp::frequency_translate(up, 0.5 * f0);
  constexpr double transition = 0.0125;
  const auto taps = dsp::design_filter(
      dsp::FilterSpec::lowpass(0.25 - 0.5 * transition, dsp::kaiser_length(80.0, transition), 80.0));
  const Samples filtered = dsp::convolve(moved, taps, dsp::ConvolveMode::Same);

  Samples out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = filtered[2 * i];
  return out;
}

}  // namespace

// --- Names -------------------------------------------------------------------

std::string_view rf_impairment_name(RfImpairment v) {
  switch (v) {
    case RfImpairment::MagnitudeRescale: return "magnitude_rescale";
    case RfImpairment::RfRolloff: return "rf_rolloff";
    case RfImpairment::RandomConvolve: return "random_convolve";
    case RfImpairment::RayleighFading: return "rayleigh_fading";
    case RfImpairment::DropSamples: return "drop_samples";
    case RfImpairment::PhaseShift: return "phase_shift";
    case RfImpairment::IqImbalance: return "iq_imbalance";
  }
  throw ParameterError("unknown RF impairment");
}

std::uint32_t applied_bit(RfImpairment v) {
  const auto i = static_cast<unsigned>(v);
  if (i >= kNumRfImpairments) throw ParameterError("unknown RF impairment");
  return kMagnitudeRescale << i;
}

RfImpairment rf_params_kind(const RfParams& params) {
  return static_cast<RfImpairment>(params.index());
}

// --- Example-level impairments ----------------------------------------------

WidebandExample time_shift(const WidebandExample& x, std::ptrdiff_t shift, Rng& rng) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  detail::require(std::abs(shift) < n, "time_shift: |shift| must be smaller than the example length");
  if (shift == 0) return x;

  WidebandExample out;
  out.meta = x.meta;
  out.meta.applied |= kTimeShift;
  out.iq.assign(x.iq.size(), Complex{});
  if (shift > 0) {
    std::copy(x.iq.begin(), x.iq.end() - shift, out.iq.begin() + shift);
    fill_noise(out.iq, 0, static_cast<std::size_t>(shift), x.meta.noise_psd, rng);
  } else {
    std::copy(x.iq.begin() - shift, x.iq.end(), out.iq.begin());
    fill_noise(out.iq, static_cast<std::size_t>(n + shift), static_cast<std::size_t>(n), x.meta.noise_psd, rng);
  }

  const double dt = static_cast<double>(shift) / static_cast<double>(n);
  for (auto a : x.annotations) {
    a.t_start += dt;
    if (clip_time(a)) out.annotations.push_back(a);
  }
  return out;
}

WidebandExample frequency_shift(const WidebandExample& x, double f0, Rng& rng) {
  detail::require(std::abs(f0) <= 0.5, "frequency_shift: |f0| must be <= 0.5");
  if (f0 == 0.0) return x;

  const bool crosses = std::any_of(x.annotations.begin(), x.annotations.end(), [&](const SignalAnnotation& a) {
    return a.f_high() + f0 > 0.5 || a.f_low() + f0 < -0.5;
  });

  WidebandExample out;
  out.meta = x.meta;
  out.meta.applied |= kFrequencyShift;
  if (!crosses) {
    out.iq = dsp::frequency_translate(x.iq, f0);
  } else {
    out.iq = shift_without_wrap(x.iq, f0);
    // The band the content moved away from has no noise left in it.
    const double lo = f0 > 0 ? -0.5 : 0.5 + f0;
    const double hi = f0 > 0 ? -0.5 + f0 : 0.5;
    add_band_noise(out.iq, x.meta.noise_psd, [&](double f) { return f >= lo && f < hi; }, rng);
  }

  for (auto a : x.annotations) {
    a.f_center += f0;
    if (clip_frequency(a)) out.annotations.push_back(a);
  }
  return out;
}

double min_resample_rate(const std::vector<SignalAnnotation>& annotations) {
  double rate = 0.0;
  for (const auto& a : annotations) {
    rate = std::max(rate, std::max(std::abs(a.f_low()), std::abs(a.f_high())) / kResampleEdge);
  }
  return rate;
}

WidebandExample random_resample(const WidebandExample& x, double rate, Rng& rng) {
  detail::require(std::isfinite(rate) && rate > 0.0, "random_resample: rate must be positive");
  rate = std::max(rate, min_resample_rate(x.annotations));
  if (rate == 1.0) return x;

  const std::size_t n = x.size();
  Samples y = dsp::resample(x.iq, rate);
  // Interpolation spreads the floor over 1/rate of the band (or folds it for
  // rate < 1); this restores the original PSD.
  const double g = 1.0 / std::sqrt(rate);
  for (auto& v : y) v *= g;

  WidebandExample out;
  out.meta = x.meta;
  out.meta.applied |= kResample;
  out.iq.assign(n, Complex{});
  const std::size_t kept = std::min(n, y.size());
  std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(kept), out.iq.begin());
  fill_noise(out.iq, kept, n, x.meta.noise_psd, rng);
  if (rate > 1.0) {
    const double edge = 0.5 / rate;
    add_band_noise(out.iq, x.meta.noise_psd, [&](double f) { return std::abs(f) >= edge; }, rng);
  }

  for (auto a : x.annotations) {
    a.t_start *= rate;
    a.duration *= rate;
    a.f_center /= rate;
    a.bandwidth /= rate;
    if (clip_time(a)) out.annotations.push_back(a);
  }
  return out;
}

WidebandExample spectral_inversion(const WidebandExample& x) {
  WidebandExample out = x;
  for (auto& v : out.iq) v = std::conj(v);
  for (auto& a : out.annotations) a.f_center = -a.f_center;
  out.meta.applied ^= kSpectralInversion;
  return out;
}

WidebandExample add_awgn(const WidebandExample& x, double added_db, Rng& rng) {
  if (std::isinf(added_db) && added_db < 0) return x;
  detail::require(std::isfinite(added_db), "add_awgn: added_db must be finite or -inf");
  const double floor = x.meta.noise_psd;
  const double added = floor * std::pow(10.0, added_db / 10.0);
  WidebandExample out = x;
  const Samples noise = dsp::complex_noise(x.size(), added, rng);
  for (std::size_t i = 0; i < out.iq.size(); ++i) out.iq[i] += noise[i];
  const double penalty = 10.0 * std::log10(1.0 + added / floor);
  for (auto& a : out.annotations) a.snr_db -= penalty;
  out.meta.noise_psd = floor + added;
  out.meta.applied |= kAwgn;
  return out;
}

// --- RF impairments -----------------------------------------------------------

RfParams draw_rf_params(RfImpairment variant, std::size_t length, double rms, Rng& rng) {
  detail::require(length > 0, "draw_rf_params: empty example");
  switch (variant) {
    case RfImpairment::MagnitudeRescale:
      return MagnitudeRescaleParams{static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(length) - 1)),
                                    rng.uniform(0.5, 2.0)};
    case RfImpairment::RfRolloff:
      return RfRolloffParams{rng.bernoulli(0.5), rng.uniform(0.01, 0.05), rng.uniform(10.0, 40.0)};
    case RfImpairment::RandomConvolve: {
      RandomConvolveParams p;
      p.taps.resize(static_cast<std::size_t>(rng.uniform_int(2, 8)));
      for (auto& t : p.taps) t = rng.uniform();
      double energy = 0.0;
      for (double t : p.taps) energy += t * t;
      if (energy <= 0.0) p.taps.assign(p.taps.size(), 1.0), energy = static_cast<double>(p.taps.size());
      for (auto& t : p.taps) t /= std::sqrt(energy);
      p.alpha = rng.uniform(0.1, 0.9);
      return p;
    }
    case RfImpairment::RayleighFading: {
      RayleighFadingParams p;
      p.taps.resize(static_cast<std::size_t>(rng.uniform_int(2, 20)));
      double energy = 0.0;
      for (auto& t : p.taps) {
        t = rng.complex_normal(1.0);
        energy += std::norm(t);
      }
      for (auto& t : p.taps) t /= std::sqrt(energy);
      return p;
    }
    case RfImpairment::DropSamples: {
      DropSamplesParams p;
      const double rate = rng.uniform(0.001, 0.01);
      const auto count = std::max<std::int64_t>(1, std::llround(rate * static_cast<double>(length) / 32.5));
      for (std::int64_t i = 0; i < count; ++i) {
        const auto len = static_cast<std::size_t>(rng.uniform_int(1, 64));
        const auto begin = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(length) - 1));
        p.regions.push_back({begin, std::min(length, begin + len)});
      }
      p.fill = static_cast<DropFill>(rng.uniform_int(0, 3));
      return p;
    }
    case RfImpairment::PhaseShift:
      return PhaseShiftParams{rng.uniform(-kPi, kPi)};
    case RfImpairment::IqImbalance: {
      IqImbalanceParams p;
      p.amplitude_db = rng.uniform(-3.0, 3.0);
      p.phase_rad = rng.uniform(-5.0, 5.0) * kPi / 180.0;
      p.dc_offset = std::polar(rng.uniform(0.0, 0.05) * rms, rng.uniform(-kPi, kPi));
      return p;
    }
  }
  throw ParameterError("draw_rf_params: unknown RF impairment");
}

WidebandExample apply_rf_impairment(const WidebandExample& x, const RfParams& params) {
  WidebandExample out = x;
  auto& iq = out.iq;
  const std::size_t n = iq.size();

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, MagnitudeRescaleParams>) {
          for (std::size_t i = std::min(p.start, n); i < n; ++i) iq[i] *= p.gain;
        } else if constexpr (std::is_same_v<P, RfRolloffParams>) {
          detail::require(p.width > 0.0 && p.width <= 0.5, "rf_rolloff: width must be in (0, 0.5]");
          dsp::fft(iq);
          for (std::size_t k = 0; k < n; ++k) {
            const double f = dsp::bin_frequency(k, n);
            const double from_edge = p.high_edge ? 0.5 - f : f + 0.5;
            if (from_edge >= p.width) continue;
            const double atten_db = p.edge_atten_db * 0.5 * (1.0 + std::cos(kPi * from_edge / p.width));
            iq[k] *= std::pow(10.0, -atten_db / 20.0);
          }
          dsp::ifft(iq);
        } else if constexpr (std::is_same_v<P, RandomConvolveParams>) {
          detail::require(p.alpha >= 0.0 && p.alpha <= 1.0, "random_convolve: alpha must be in [0, 1]");
          if (p.alpha == 0.0) return;
          const Samples filtered = dsp::convolve(x.iq, p.taps, dsp::ConvolveMode::Causal);
          for (std::size_t i = 0; i < n; ++i) iq[i] = p.alpha * filtered[i] + (1.0 - p.alpha) * x.iq[i];
        } else if constexpr (std::is_same_v<P, RayleighFadingParams>) {
          detail::require(!p.taps.empty(), "rayleigh_fading: need at least one tap");
          iq = dsp::convolve(x.iq, p.taps, dsp::ConvolveMode::Causal);
        } else if constexpr (std::is_same_v<P, DropSamplesParams>) {
          Complex mean{};
          if (p.fill == DropFill::Mean) mean = std::accumulate(x.iq.begin(), x.iq.end(), Complex{}) / static_cast<double>(n);
          for (const auto& r : p.regions) {
            detail::require(r.begin <= r.end && r.end <= n, "drop_samples: region outside the example");
            if (r.begin == r.end) continue;
            Complex value{};
            switch (p.fill) {
              case DropFill::FrontFill: value = r.begin > 0 ? x.iq[r.begin - 1] : (r.end < n ? x.iq[r.end] : Complex{}); break;
              case DropFill::BackFill: value = r.end < n ? x.iq[r.end] : (r.begin > 0 ? x.iq[r.begin - 1] : Complex{}); break;
              case DropFill::Mean: value = mean; break;
              case DropFill::Zero: value = 0.0; break;
            }
            std::fill(iq.begin() + static_cast<std::ptrdiff_t>(r.begin), iq.begin() + static_cast<std::ptrdiff_t>(r.end), value);
          }
        } else if constexpr (std::is_same_v<P, PhaseShiftParams>) {
          if (p.phase == 0.0) return;
          const Complex rot = std::polar(1.0, p.phase);
          for (auto& v : iq) v *= rot;
        } else if constexpr (std::is_same_v<P, IqImbalanceParams>) {
          if (p.amplitude_db == 0.0 && p.phase_rad == 0.0 && p.dc_offset == Complex{}) return;
          const double gi = std::pow(10.0, p.amplitude_db / 20.0);
          const double c = std::cos(p.phase_rad), s = std::sin(p.phase_rad);
          for (auto& v : iq) {
            const double i = v.real(), q = v.imag();
            v = Complex(gi * i, q * c - i * s) + p.dc_offset;
          }
        }
      },
      params);

  out.meta.applied |= applied_bit(rf_params_kind(params));
  return out;
}

WidebandExample apply_rf_impairment(const WidebandExample& x, RfImpairment variant, Rng& rng) {
  const double rms = std::sqrt(dsp::mean_power(x.iq));
  return apply_rf_impairment(x, draw_rf_params(variant, x.size(), rms, rng));
}

// --- Pipeline -------------------------------------------------------------------

void ImpairmentConfig::validate() const {
  for (double p : {p_time_shift, p_freq_shift, p_resample, p_spectral_inversion, p_awgn, p_magnitude_rescale}) {
    detail::require(p >= 0.0 && p <= 1.0, "ImpairmentConfig: probabilities must be in [0, 1]");
  }
  detail::require(randaugment_count <= pool.size(), "ImpairmentConfig: randaugment_count exceeds the pool size");
  detail::require(pool.size() <= kNumRfImpairments, "ImpairmentConfig: pool larger than the variant set");
  detail::require(max_time_shift >= 0.0 && max_time_shift < 1.0, "ImpairmentConfig: invalid max_time_shift");
  detail::require(max_freq_shift >= 0.0 && max_freq_shift <= 0.5, "ImpairmentConfig: invalid max_freq_shift");
  detail::require(resample_min > 0.0 && resample_min <= resample_max, "ImpairmentConfig: invalid resample range");
  detail::require(awgn_min_db <= awgn_max_db, "ImpairmentConfig: invalid AWGN range");
}

std::vector<RfImpairment> select_rand_augment(const ImpairmentConfig& cfg, Rng& rng) {
  std::vector<RfImpairment> pool = cfg.pool;
  for (std::size_t i = 0; i < cfg.randaugment_count; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(pool.size()) - 1));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(cfg.randaugment_count);
  return pool;
}

WidebandExample rand_augment(const WidebandExample& x, const ImpairmentConfig& cfg, Rng& rng) {
  cfg.validate();
  WidebandExample out = x;
  for (const auto variant : select_rand_augment(cfg, rng)) {
    if (variant == RfImpairment::MagnitudeRescale && !rng.bernoulli(cfg.p_magnitude_rescale)) continue;
    out = apply_rf_impairment(out, variant, rng);
  }
  return out;
}

WidebandExample impair_example(const WidebandExample& x, const ImpairmentConfig& cfg, Rng& rng) {
  cfg.validate();
  WidebandExample out = x;
  const auto n = static_cast<double>(x.size());

  if (rng.bernoulli(cfg.p_time_shift)) {
    const auto limit = static_cast<std::ptrdiff_t>(std::floor(cfg.max_time_shift * n));
    const auto shift = std::clamp<std::ptrdiff_t>(std::llround(rng.uniform(-cfg.max_time_shift, cfg.max_time_shift) * n),
                                                  -limit, limit);
    out = time_shift(out, shift, rng);
  }
  if (rng.bernoulli(cfg.p_freq_shift)) {
    out = frequency_shift(out, rng.uniform(-cfg.max_freq_shift, cfg.max_freq_shift), rng);
  }
  if (rng.bernoulli(cfg.p_resample)) {
    out = random_resample(out, rng.uniform(cfg.resample_min, cfg.resample_max), rng);
  }
  if (rng.bernoulli(cfg.p_spectral_inversion)) {
    out = spectral_inversion(out);
  }
  out = rand_augment(out, cfg, rng);
  if (rng.bernoulli(cfg.p_awgn)) {
    const double db = cfg.awgn_min_db == cfg.awgn_max_db ? cfg.awgn_min_db : rng.uniform(cfg.awgn_min_db, cfg.awgn_max_db);
    out = add_awgn(out, db, rng);
  }
  out.meta.impaired = true;
  return out;
}

}  // namespace wbsig::impair
