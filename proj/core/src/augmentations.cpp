#include <algorithm>
#include <cmath>
#include <numbers>

#include "wbsig/augmentations.hpp"
#include "wbsig/error.hpp"
#include "wbsig/rng.hpp"

namespace wbsig::augment {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinPiece = 1e-12;

std::size_t to_sample(double t, std::size_t n) {
  const auto s = std::llround(t * static_cast<double>(n));
  return static_cast<std::size_t>(std::clamp<long long>(s, 0, static_cast<long long>(n)));
}

double quantize_value(double v, double range, int levels, QuantizeRounding rounding) {
  if (range <= 0.0) return v;
  const double width = 2.0 * range / levels;
  const auto bin = std::clamp(static_cast<int>(std::floor((v + range) / width)), 0, levels - 1);
  const double floor_value = -range + bin * width;
  switch (rounding) {
    case QuantizeRounding::Floor: return floor_value;
    case QuantizeRounding::Middle: return floor_value + 0.5 * width;
    case QuantizeRounding::Ceiling: return floor_value + width;
  }
  return floor_value;
}

void apply_agc(Samples& iq, const AgcParams& p) {
  constexpr double eps = 1e-20;
  double gain_db = p.initial_gain_db;
  double level_db = iq.empty() ? p.ref_level_db : 10.0 * std::log10(std::norm(iq.front()) + eps);
  for (auto& v : iq) {
    const double sample_db = 10.0 * std::log10(std::norm(v) + eps);
    level_db = (1.0 - p.alpha_smooth) * level_db + p.alpha_smooth * sample_db;
    const double error = p.ref_level_db - (level_db + gain_db);
    if (level_db + gain_db > p.high_level_db) {
      gain_db += p.alpha_overflow * error;
    } else if (level_db < p.low_level_db) {
      // Signal too weak to steer; hold the gain.
    } else if (std::abs(error) > p.track_range_db) {
      gain_db += p.alpha_acquire * error;
    } else {
      gain_db += p.alpha_track * error;
    }
    v *= std::pow(10.0, gain_db / 20.0);
  }
}

}  // namespace

std::string_view iq_augmentation_name(IqAugmentation v) {
  static constexpr std::string_view kNames[] = {
      "time_reversal", "channel_swap", "amplitude_reversal", "quantize", "cut_out",   "patch_shuffle",
      "lo_drift",      "time_varying_noise", "clip",         "add_slope", "gain_drift", "agc"};
  const auto i = static_cast<std::size_t>(v);
  detail::require(i < kNumIqAugmentations, "unknown IQ augmentation");
  return kNames[i];
}

IqAugmentation iq_params_kind(const IqAugParams& params) {
  return static_cast<IqAugmentation>(params.index());
}

// --- Interval bookkeeping -------------------------------------------------------

std::vector<SignalAnnotation> subtract_interval(const std::vector<SignalAnnotation>& boxes, double t0, double t1) {
  std::vector<SignalAnnotation> out;
  for (const auto& a : boxes) {
    if (a.t_stop() <= t0 || a.t_start >= t1) {
      out.push_back(a);
      continue;
    }
    if (t0 - a.t_start > kMinPiece) {
      auto left = a;
      left.duration = t0 - a.t_start;
      out.push_back(left);
    }
    if (a.t_stop() - t1 > kMinPiece) {
      auto right = a;
      right.t_start = t1;
      right.duration = a.t_stop() - t1;
      out.push_back(right);
    }
  }
  return out;
}

std::vector<SignalAnnotation> intersect_interval(const std::vector<SignalAnnotation>& boxes, double t0, double t1) {
  std::vector<SignalAnnotation> out;
  for (const auto& a : boxes) {
    if (a.t_start >= t0 && a.t_stop() <= t1) {
      out.push_back(a);
      continue;
    }
    const double lo = std::max(a.t_start, t0);
    const double hi = std::min(a.t_stop(), t1);
    if (hi - lo <= kMinPiece) continue;
    auto clipped = a;
    clipped.t_start = lo;
    clipped.duration = hi - lo;
    out.push_back(clipped);
  }
  return out;
}

// --- IQ augmentations -----------------------------------------------------------

std::vector<double> lo_drift_offsets(std::size_t length, const LoDriftParams& p, Rng& rng) {
  detail::require(p.max_drift >= 0.0 && p.drift_rate >= 0.0, "lo_drift: parameters must be non-negative");
  std::vector<double> offsets(length);
  double offset = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    offsets[i] = offset;
    const double next = offset + p.drift_rate * rng.normal();
    offset = std::abs(next) > p.max_drift ? 0.0 : next;
  }
  return offsets;
}

IqAugParams draw_iq_params(IqAugmentation variant, const WidebandExample& x, Rng& rng) {
  switch (variant) {
    case IqAugmentation::TimeReversal: return TimeReversalParams{rng.bernoulli(0.5)};
    case IqAugmentation::ChannelSwap: return ChannelSwapParams{};
    case IqAugmentation::AmplitudeReversal: return AmplitudeReversalParams{};
    case IqAugmentation::Quantize:
      return QuantizeParams{static_cast<int>(rng.uniform_int(4, 64)),
                            static_cast<QuantizeRounding>(rng.uniform_int(0, 2))};
    case IqAugmentation::CutOut: {
      const double d = rng.uniform(0.05, 0.2);
      return CutOutParams{rng.uniform(0.0, 1.0 - d), d, static_cast<CutOutFill>(rng.uniform_int(0, 4))};
    }
    case IqAugmentation::PatchShuffle:
      return PatchShuffleParams{static_cast<std::size_t>(rng.uniform_int(3, 10)), rng.uniform(0.01, 0.05)};
    case IqAugmentation::LoDrift: return LoDriftParams{rng.uniform(0.001, 0.01), rng.uniform(1e-7, 1e-5)};
    case IqAugmentation::TimeVaryingNoise:
      return TimeVaryingNoiseParams{rng.uniform(-20.0, -10.0), rng.uniform(-10.0, 0.0),
                                    static_cast<int>(rng.uniform_int(1, 5))};
    case IqAugmentation::Clip: return ClipParams{rng.uniform(0.75, 0.95)};
    case IqAugmentation::AddSlope: return AddSlopeParams{};
    case IqAugmentation::GainDrift: return GainDriftParams{rng.uniform(1.0, 6.0), rng.uniform(1e-3, 1e-2)};
    case IqAugmentation::Agc: {
      AgcParams p;
      const double power_db = 10.0 * std::log10(std::max(1e-20, dsp::mean_power(x.iq)));
      p.initial_gain_db = rng.uniform(-3.0, 3.0);
      p.alpha_smooth = rng.uniform(1e-4, 1e-2);
      p.alpha_track = rng.uniform(1e-5, 1e-4);
      p.alpha_overflow = rng.uniform(1e-3, 1e-2);
      p.alpha_acquire = rng.uniform(1e-4, 1e-3);
      p.ref_level_db = power_db + rng.uniform(-3.0, 3.0);
      p.track_range_db = rng.uniform(1.0, 5.0);
      p.low_level_db = p.ref_level_db - 40.0;
      p.high_level_db = p.ref_level_db + 10.0;
      return p;
    }
  }
  throw ParameterError("draw_iq_params: unknown IQ augmentation");
}

WidebandExample apply_iq_augmentation(const WidebandExample& x, const IqAugParams& params, Rng& rng) {
  WidebandExample out = x;
  auto& iq = out.iq;
  const std::size_t n = iq.size();

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, TimeReversalParams>) {
          std::reverse(iq.begin(), iq.end());
          if (p.undo_spectral_inversion) {
            for (auto& v : iq) v = std::conj(v);
          }
          for (auto& a : out.annotations) {
            a.t_start = 1.0 - a.t_start - a.duration;
            if (!p.undo_spectral_inversion) a.f_center = -a.f_center;
          }
        } else if constexpr (std::is_same_v<P, ChannelSwapParams>) {
          for (auto& v : iq) v = Complex(v.imag(), v.real());
          for (auto& a : out.annotations) a.f_center = -a.f_center;
        } else if constexpr (std::is_same_v<P, AmplitudeReversalParams>) {
          for (auto& v : iq) v = -v;
        } else if constexpr (std::is_same_v<P, QuantizeParams>) {
          detail::require(p.levels >= 2, "quantize: levels must be >= 2");
          double ri = 0.0, rq = 0.0;
          for (const auto& v : iq) {
            ri = std::max(ri, std::abs(v.real()));
            rq = std::max(rq, std::abs(v.imag()));
          }
          for (auto& v : iq) {
            v = Complex(quantize_value(v.real(), ri, p.levels, p.rounding),
                        quantize_value(v.imag(), rq, p.levels, p.rounding));
          }
        } else if constexpr (std::is_same_v<P, CutOutParams>) {
          detail::require(p.duration > 0.0 && p.t_start >= 0.0 && p.t_start + p.duration <= 1.0 + 1e-12,
                          "cut_out: region must lie within [0, 1]");
          const std::size_t begin = to_sample(p.t_start, n), end = to_sample(p.t_start + p.duration, n);
          const double floor = x.meta.noise_psd;
          Samples fill;
          switch (p.fill) {
            case CutOutFill::Zeros: fill.assign(end - begin, Complex{}); break;
            case CutOutFill::Ones: fill.assign(end - begin, Complex(1.0, 0.0)); break;
            case CutOutFill::LowNoise: fill = dsp::complex_noise(end - begin, 0.1 * floor, rng); break;
            case CutOutFill::AverageNoise: fill = dsp::complex_noise(end - begin, floor, rng); break;
            case CutOutFill::HighNoise: fill = dsp::complex_noise(end - begin, 10.0 * floor, rng); break;
          }
          std::copy(fill.begin(), fill.end(), iq.begin() + static_cast<std::ptrdiff_t>(begin));
          const double nd = static_cast<double>(n);
          out.annotations = subtract_interval(x.annotations, static_cast<double>(begin) / nd,
                                              static_cast<double>(end) / nd);
        } else if constexpr (std::is_same_v<P, PatchShuffleParams>) {
          detail::require(p.patch_size >= 1, "patch_shuffle: patch_size must be >= 1");
          for (std::size_t start = 0; start + p.patch_size <= n; start += p.patch_size) {
            if (!rng.bernoulli(p.shuffle_ratio)) continue;
            for (std::size_t i = p.patch_size; i > 1; --i) {
              const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
              std::swap(iq[start + i - 1], iq[start + j]);
            }
          }
        } else if constexpr (std::is_same_v<P, LoDriftParams>) {
          const auto offsets = lo_drift_offsets(n, p, rng);
          double phase = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            iq[i] *= std::polar(1.0, phase);
            phase = std::remainder(phase + kTwoPi * offsets[i], kTwoPi);
          }
        } else if constexpr (std::is_same_v<P, TimeVaryingNoiseParams>) {
          detail::require(p.inflections >= 0, "time_varying_noise: negative inflection count");
          std::vector<double> knots{0.0, 1.0};
          for (int i = 0; i < p.inflections; ++i) knots.push_back(rng.uniform());
          std::sort(knots.begin(), knots.end());
          std::vector<double> levels(knots.size());
          for (auto& l : levels) l = rng.uniform(std::min(p.low_db, p.high_db), std::max(p.low_db, p.high_db));
          std::size_t seg = 0;
          for (std::size_t i = 0; i < n; ++i) {
            const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
            while (seg + 2 < knots.size() && t > knots[seg + 1]) ++seg;
            const double span = knots[seg + 1] - knots[seg];
            const double w = span > 0.0 ? (t - knots[seg]) / span : 0.0;
            const double db = levels[seg] + w * (levels[seg + 1] - levels[seg]);
            iq[i] += rng.complex_normal(x.meta.noise_psd * std::pow(10.0, db / 10.0));
          }
        } else if constexpr (std::is_same_v<P, ClipParams>) {
          detail::require(p.percent > 0.0 && p.percent <= 1.0, "clip: percent must be in (0, 1]");
          double imax = -INFINITY, imin = INFINITY, qmax = -INFINITY, qmin = INFINITY;
          for (const auto& v : iq) {
            imax = std::max(imax, v.real()), imin = std::min(imin, v.real());
            qmax = std::max(qmax, v.imag()), qmin = std::min(qmin, v.imag());
          }
          const double ihi = p.percent * imax, ilo = p.percent * imin;
          const double qhi = p.percent * qmax, qlo = p.percent * qmin;
          for (auto& v : iq) {
            v = Complex(std::clamp(v.real(), std::min(ilo, ihi), std::max(ilo, ihi)),
                        std::clamp(v.imag(), std::min(qlo, qhi), std::max(qlo, qhi)));
          }
        } else if constexpr (std::is_same_v<P, AddSlopeParams>) {
          for (std::size_t i = 1; i < n; ++i) iq[i] = x.iq[i] + (x.iq[i] - x.iq[i - 1]);
        } else if constexpr (std::is_same_v<P, GainDriftParams>) {
          double gain_db = 0.0;
          for (auto& v : iq) {
            v *= std::pow(10.0, gain_db / 20.0);
            gain_db = std::clamp(gain_db + p.drift_rate_db * rng.normal(), -p.max_drift_db, p.max_drift_db);
          }
        } else if constexpr (std::is_same_v<P, AgcParams>) {
          apply_agc(iq, p);
        }
      },
      params);
  return out;
}

WidebandExample apply_iq_augmentation(const WidebandExample& x, IqAugmentation variant, Rng& rng) {
  return apply_iq_augmentation(x, draw_iq_params(variant, x, rng), rng);
}

// --- Mixing ----------------------------------------------------------------------

WidebandExample mix_up(const WidebandExample& x, const WidebandExample& y, double weight) {
  detail::require(x.size() == y.size(), "mix_up: examples must have the same length");
  detail::require(weight >= 0.0 && weight <= 1.0, "mix_up: weight must be in [0, 1]");
  if (weight == 0.0) return x;
  WidebandExample out = x;
  for (std::size_t i = 0; i < out.iq.size(); ++i) out.iq[i] += weight * y.iq[i];
  out.annotations.insert(out.annotations.end(), y.annotations.begin(), y.annotations.end());
  return out;
}

WidebandExample cut_mix(const WidebandExample& x, const WidebandExample& y, double t_start, double duration) {
  detail::require(x.size() == y.size(), "cut_mix: examples must have the same length");
  detail::require(duration >= 0.0 && t_start >= 0.0 && t_start + duration <= 1.0 + 1e-12,
                  "cut_mix: region must lie within [0, 1]");
  const std::size_t n = x.size();
  const std::size_t begin = to_sample(t_start, n), end = to_sample(t_start + duration, n);
  WidebandExample out = x;
  std::copy(y.iq.begin() + static_cast<std::ptrdiff_t>(begin), y.iq.begin() + static_cast<std::ptrdiff_t>(end),
            out.iq.begin() + static_cast<std::ptrdiff_t>(begin));
  const double nd = static_cast<double>(n);
  const double t0 = static_cast<double>(begin) / nd, t1 = static_cast<double>(end) / nd;
  out.annotations = subtract_interval(x.annotations, t0, t1);
  const auto inside = intersect_interval(y.annotations, t0, t1);
  out.annotations.insert(out.annotations.end(), inside.begin(), inside.end());
  return out;
}

WidebandExample mix_augmentation(const WidebandExample& x, const WidebandExample& y, MixVariant variant, Rng& rng) {
  switch (variant) {
    case MixVariant::MixUp: {
      double w = 0.0;
      while (w == 0.0) w = rng.uniform();
      return mix_up(x, y, w);
    }
    case MixVariant::CutMix: {
      const double d = rng.uniform(0.1, 0.5);
      return cut_mix(x, y, rng.uniform(0.0, 1.0 - d), d);
    }
  }
  throw ParameterError("mix_augmentation: unknown variant");
}

}  // namespace wbsig::augment
