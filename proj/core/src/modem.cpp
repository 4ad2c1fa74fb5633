#include <algorithm>
#include <cmath>
#include <numbers>

#include "wbsig/error.hpp"
#include "wbsig/modem.hpp"
#include "wbsig/rng.hpp"

namespace wbsig::modem {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<std::size_t> draw_symbols(std::size_t count, std::size_t alphabet, Rng& rng) {
  std::vector<std::size_t> symbols(count);
  for (auto& s : symbols) s = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(alphabet) - 1));
  return symbols;
}

// Resamples `base` by `rate` and returns `length` outputs starting `lead`
// input samples in, so filter start-up transients are discarded.
Samples resample_window(const Samples& base, double rate, std::size_t lead, std::size_t length) {
  Samples y = dsp::resample(base, rate);
  const auto skip = static_cast<std::size_t>(std::ceil(static_cast<double>(lead) * rate));
  detail::require(y.size() >= skip + length, "synthesize_at_bandwidth: base waveform too short");
  return Samples(y.begin() + static_cast<std::ptrdiff_t>(skip),
                 y.begin() + static_cast<std::ptrdiff_t>(skip + length));
}

// Extra input samples on either side of the resampling window.
constexpr std::size_t kGuard = 128;

std::size_t base_length(std::size_t num_samples, double rate) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(num_samples) / rate)) + 2 * kGuard;
}

}  // namespace

// --- Linear ----------------------------------------------------------------

std::vector<double> linear_pulse(std::size_t samples_per_symbol, double rolloff, std::size_t span) {
  detail::require(samples_per_symbol >= 1, "linear_pulse: samples_per_symbol must be >= 1");
  const std::size_t taps = 2 * span * samples_per_symbol + 1;
  auto pulse = dsp::design_filter(
      dsp::FilterSpec::root_raised_cosine(static_cast<double>(samples_per_symbol), rolloff, taps));
  const double g = std::sqrt(static_cast<double>(samples_per_symbol));
  for (auto& p : pulse) p *= g;
  return pulse;
}

Samples modulate_linear(const LinearModSpec& spec, std::span<const std::size_t> symbols) {
  detail::require(spec.constellation.size() >= 2, "modulate_linear: constellation needs >= 2 points");
  detail::require(spec.samples_per_symbol >= 2.0, "modulate_linear: samples_per_symbol must be >= 2");
  detail::require(!symbols.empty(), "modulate_linear: need at least one symbol");

  const auto sps = static_cast<std::size_t>(std::floor(spec.samples_per_symbol));
  const auto pulse = linear_pulse(sps, spec.rrc_rolloff, spec.filter_span);
  Samples out((symbols.size() - 1) * sps + pulse.size());
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    detail::require(symbols[k] < spec.constellation.size(), "modulate_linear: symbol index out of range");
    const Complex c = spec.constellation[symbols[k]];
    Complex* dst = out.data() + k * sps;
    for (std::size_t i = 0; i < pulse.size(); ++i) dst[i] += c * pulse[i];
  }
  if (static_cast<double>(sps) == spec.samples_per_symbol) return out;
  return dsp::resample(out, spec.samples_per_symbol / static_cast<double>(sps));
}

Samples synthesize_linear(const LinearModSpec& spec, std::size_t num_symbols, Rng& rng) {
  const auto symbols = draw_symbols(num_symbols, spec.constellation.size(), rng);
  return modulate_linear(spec, symbols);
}

// --- FSK -------------------------------------------------------------------

double FskSpec::effective_index() const {
  return variant == FskVariant::Msk || variant == FskVariant::Gmsk ? 0.5 : modulation_index;
}

FskSpec fsk_spec_for(SignalClass c, double samples_per_symbol, Rng& rng) {
  detail::require(class_to_family(c) == ModFamily::FSK, "fsk_spec_for: not an FSK class");
  FskSpec spec;
  // Within each tone count the classes run FSK, GFSK, MSK, GMSK.
  const int offset = (class_index(c) - class_index(SignalClass::FSK2)) % 4;
  spec.variant = static_cast<FskVariant>(offset);
  spec.levels = class_order(c);
  spec.modulation_index = spec.variant == FskVariant::Fsk || spec.variant == FskVariant::Gfsk ? 1.0 : 0.5;
  spec.gaussian_bt = spec.gaussian() ? rng.uniform(0.3, 0.5) : 0.0;
  spec.samples_per_symbol = samples_per_symbol;
  return spec;
}

double fsk_occupied_bandwidth(const FskSpec& spec) {
  return ((spec.levels - 1) * spec.effective_index() + 1.0) / spec.samples_per_symbol;
}

Samples modulate_fsk(const FskSpec& spec, std::span<const std::size_t> symbols) {
  const int m = spec.levels;
  detail::require(m == 2 || m == 4 || m == 8 || m == 16, "modulate_fsk: levels must be 2, 4, 8 or 16");
  detail::require(spec.samples_per_symbol >= 1.0, "modulate_fsk: samples_per_symbol must be >= 1");
  detail::require(!symbols.empty(), "modulate_fsk: need at least one symbol");
  const double h = spec.effective_index();
  detail::require(h > 0.0, "modulate_fsk: modulation index must be positive");
  detail::require(h * (m - 1) / (2.0 * spec.samples_per_symbol) <= 0.5,
                  "modulate_fsk: outer tone exceeds Nyquist");

  const double sps = spec.samples_per_symbol;
  const auto n = static_cast<std::size_t>(std::ceil(static_cast<double>(symbols.size()) * sps));
  std::vector<double> freq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = std::min(symbols.size() - 1, static_cast<std::size_t>(static_cast<double>(i) / sps));
    detail::require(symbols[k] < static_cast<std::size_t>(m), "modulate_fsk: symbol index out of range");
    const double a = 2.0 * static_cast<double>(symbols[k]) - (m - 1);
    freq[i] = a * h / (2.0 * sps);
  }

  if (spec.gaussian()) {
    const std::size_t half = static_cast<std::size_t>(std::ceil(2.0 * sps));
    const auto taps = dsp::design_filter(dsp::FilterSpec::gaussian(sps, spec.gaussian_bt, 2 * half + 1));
    std::vector<double> smoothed(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < taps.size(); ++j) {
        // Edge samples extend the first/last symbol's frequency.
        const auto idx = static_cast<std::ptrdiff_t>(i + j) - static_cast<std::ptrdiff_t>(half);
        const auto clamped = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(n) - 1);
        acc += taps[j] * freq[static_cast<std::size_t>(clamped)];
      }
      smoothed[i] = acc;
    }
    freq.swap(smoothed);
  }

  Samples out(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::polar(1.0, phase);
    phase = std::remainder(phase + kTwoPi * freq[i], kTwoPi);
  }
  return out;
}

Samples synthesize_fsk(const FskSpec& spec, std::size_t num_symbols, Rng& rng) {
  const auto symbols = draw_symbols(num_symbols, static_cast<std::size_t>(spec.levels), rng);
  return modulate_fsk(spec, symbols);
}

// --- OFDM ------------------------------------------------------------------

std::size_t OfdmSpec::cp_length() const {
  return static_cast<std::size_t>(std::lround(cp_ratio * static_cast<double>(fft_size())));
}

OfdmSpec random_ofdm_spec(SignalClass c, Rng& rng) {
  detail::require(class_to_family(c) == ModFamily::OFDM, "random_ofdm_spec: not an OFDM class");
  static constexpr double kCpRatios[] = {1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
  OfdmSpec spec;
  spec.num_subcarriers = class_order(c);
  spec.cp_ratio = kCpRatios[rng.uniform_int(0, 3)];
  spec.dc_subcarrier = rng.bernoulli(0.5);
  spec.sidelobe = static_cast<SidelobeSuppression>(rng.uniform_int(0, 2));
  spec.enable_pilots = rng.bernoulli(0.5);
  spec.enable_resource_blocks = rng.bernoulli(0.5);
  spec.enable_bursty_symbols = rng.bernoulli(0.5);
  return spec;
}

OfdmWaveform synthesize_ofdm(const OfdmSpec& spec, std::size_t num_symbols, Rng& rng) {
  detail::require(spec.num_subcarriers >= 2 && spec.num_subcarriers % 2 == 0,
                  "synthesize_ofdm: num_subcarriers must be even and >= 2");
  detail::require(spec.cp_ratio >= 0.0 && spec.cp_ratio <= 0.25, "synthesize_ofdm: cp_ratio must be in [0, 0.25]");
  detail::require(num_symbols >= 1, "synthesize_ofdm: need at least one symbol");

  const std::size_t nfft = spec.fft_size();
  const std::size_t cp = spec.cp_length();
  const std::size_t sym_len = nfft + cp;
  const int half = spec.num_subcarriers / 2;

  // Subcarrier k in [-half, half) lives in FFT bin (k mod nfft).
  int null_edges = 0;
  if (spec.sidelobe == SidelobeSuppression::EdgeNulling) {
    null_edges = std::max(1, static_cast<int>(std::lround(rng.uniform(0.05, 0.15) * half)));
  }
  std::vector<std::size_t> active_bins;
  for (int k = -half + null_edges; k < half - null_edges; ++k) {
    if (k == 0 && !spec.dc_subcarrier) continue;
    active_bins.push_back(static_cast<std::size_t>((k + static_cast<int>(nfft)) % static_cast<int>(nfft)));
  }

  static const SignalClass kDataClasses[] = {SignalClass::BPSK, SignalClass::QPSK, SignalClass::QAM16,
                                             SignalClass::QAM64};
  const auto data_points = build_constellation(kDataClasses[rng.uniform_int(0, 3)]);

  std::vector<bool> is_pilot(nfft, false);
  std::vector<Complex> pilot_value(nfft);
  if (spec.enable_pilots) {
    const auto count = std::max<std::size_t>(
        1, static_cast<std::size_t>(rng.uniform(0.02, 0.1) * static_cast<double>(active_bins.size())));
    std::vector<std::size_t> pool = active_bins;
    for (std::size_t i = 0; i < count && i < pool.size(); ++i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                              static_cast<std::int64_t>(pool.size()) - 1));
      std::swap(pool[i], pool[j]);
      is_pilot[pool[i]] = true;
      pilot_value[pool[i]] = std::polar(std::sqrt(2.0), rng.uniform(-std::numbers::pi, std::numbers::pi));
    }
  }

  struct Block {
    std::size_t sym_begin, sym_end;
    int k_begin, k_end;
  };
  std::vector<Block> blocks;
  if (spec.enable_resource_blocks) {
    const auto count = rng.uniform_int(1, 3);
    for (std::int64_t b = 0; b < count; ++b) {
      const auto width = std::max(1, static_cast<int>(rng.uniform(0.1, 0.4) * spec.num_subcarriers));
      const auto k0 = static_cast<int>(rng.uniform_int(-half, half - width));
      const auto dur = std::max<std::size_t>(1, static_cast<std::size_t>(rng.uniform(0.1, 0.5) * static_cast<double>(num_symbols)));
      const auto s0 = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(num_symbols - dur)));
      blocks.push_back({s0, s0 + dur, k0, k0 + width});
    }
  }

  std::vector<bool> active(num_symbols, true);
  if (spec.enable_bursty_symbols) {
    const double p_off = rng.uniform(0.1, 0.3);
    for (std::size_t s = 0; s < num_symbols; ++s) active[s] = !rng.bernoulli(p_off);
    if (std::none_of(active.begin(), active.end(), [](bool a) { return a; })) {
      active[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(num_symbols) - 1))] = true;
    }
  }

  OfdmWaveform wf;
  wf.fft_size = nfft;
  wf.cp_length = cp;
  wf.symbol_active = active;
  wf.grid.assign(num_symbols, Samples(nfft));
  wf.occupied_bandwidth = static_cast<double>(spec.num_subcarriers - 2 * null_edges) / static_cast<double>(nfft);

  for (std::size_t s = 0; s < num_symbols; ++s) {
    if (!active[s]) continue;
    auto& X = wf.grid[s];
    for (const auto bin : active_bins) {
      X[bin] = is_pilot[bin] ? pilot_value[bin]
                             : data_points[static_cast<std::size_t>(
                                   rng.uniform_int(0, static_cast<std::int64_t>(data_points.size()) - 1))];
    }
    for (const auto& b : blocks) {
      if (s < b.sym_begin || s >= b.sym_end) continue;
      for (int k = b.k_begin; k < b.k_end; ++k) {
        X[static_cast<std::size_t>((k + static_cast<int>(nfft)) % static_cast<int>(nfft))] = 0.0;
      }
    }
  }

  const double scale = static_cast<double>(nfft) / std::sqrt(static_cast<double>(std::max<std::size_t>(1, active_bins.size())));
  const std::size_t ramp =
      spec.sidelobe == SidelobeSuppression::TimeWindowing && cp >= 2 ? cp / 2 : 0;

  wf.samples.assign(num_symbols * sym_len, Complex{});
  Samples body(nfft);
  for (std::size_t s = 0; s < num_symbols; ++s) {
    if (!active[s]) continue;
    std::copy(wf.grid[s].begin(), wf.grid[s].end(), body.begin());
    dsp::ifft(body);
    for (auto& v : body) v *= scale;

    Complex* dst = wf.samples.data() + s * sym_len;
    for (std::size_t i = 0; i < cp; ++i) dst[i] = body[nfft - cp + i];
    for (std::size_t i = 0; i < nfft; ++i) dst[cp + i] = body[i];
    if (ramp == 0) continue;

    // Raised-cosine edges: the leading ramp shapes the start of the CP and
    // the cyclic postfix fades out over the next symbol's CP.
    for (std::size_t i = 0; i < ramp; ++i) {
      const double r = 0.5 * (1.0 - std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(ramp)));
      dst[i] *= r;
      if (s + 1 < num_symbols) dst[sym_len + i] += body[i] * (1.0 - r);
    }
  }

  const double power = dsp::mean_power(wf.samples);
  const double g = power > 0.0 ? 1.0 / std::sqrt(power) : 1.0;
  for (auto& v : wf.samples) v *= g;
  wf.scale = scale * g;
  return wf;
}

// --- Class-level -----------------------------------------------------------

SourceWaveform synthesize_at_bandwidth(SignalClass c, double bandwidth, std::size_t num_samples, Rng& rng) {
  detail::require(bandwidth > 0.0 && bandwidth < 1.0, "synthesize_at_bandwidth: bandwidth must be in (0, 1)");
  detail::require(num_samples > 0, "synthesize_at_bandwidth: num_samples must be positive");

  SourceWaveform out;
  out.bandwidth = bandwidth;
  const ModFamily family = class_to_family(c);

  if (family == ModFamily::FSK) {
    FskSpec spec = fsk_spec_for(c, 1.0, rng);
    const double span = (spec.levels - 1) * spec.effective_index() + 1.0;
    spec.samples_per_symbol = std::ceil(2.0 * span);
    const double base_bw = span / spec.samples_per_symbol;
    const double rate = base_bw / bandwidth;
    const std::size_t len = base_length(num_samples, rate);
    const auto num_symbols = static_cast<std::size_t>(std::ceil(static_cast<double>(len) / spec.samples_per_symbol));
    const Samples raw = synthesize_fsk(spec, num_symbols, rng);
    // Confine sidelobes to the labelled band before rescaling.
    const double transition = 0.1 * base_bw;
    auto taps = dsp::design_filter(dsp::FilterSpec::lowpass(
        std::min(0.5, 0.5 * base_bw - 0.5 * transition), dsp::kaiser_length(60.0, transition)));
    const Samples filtered = dsp::convolve(raw, taps, dsp::ConvolveMode::Same);
    out.samples = resample_window(filtered, rate, kGuard, num_samples);
    return out;
  }

  if (family == ModFamily::OFDM) {
    const OfdmSpec spec = random_ofdm_spec(c, rng);
    // Edge nulling is drawn inside synthesize_ofdm; size for the narrowest
    // possible occupied span, which needs the most base samples.
    const int half = spec.num_subcarriers / 2;
    const double min_occupied = (spec.num_subcarriers - 2.0 * std::max(1.0, std::round(0.15 * half))) /
                                static_cast<double>(spec.fft_size());
    const std::size_t len = base_length(num_samples, min_occupied / bandwidth);
    const std::size_t sym_len = spec.fft_size() + spec.cp_length();
    const std::size_t num_symbols = (len + sym_len - 1) / sym_len + 1;
    const OfdmWaveform wf = synthesize_ofdm(spec, num_symbols, rng);
    const double rate = wf.occupied_bandwidth / bandwidth;
    // Random start so the symbol grid is not aligned to the emission start.
    const std::size_t slack = wf.samples.size() - base_length(num_samples, rate);
    const auto lead = kGuard + static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(std::min(slack, sym_len))));
    out.samples = resample_window(wf.samples, rate, lead, num_samples);
    return out;
  }

  LinearModSpec spec;
  spec.constellation = build_constellation(c);
  spec.rrc_rolloff = rng.uniform(0.1, 0.5);
  spec.samples_per_symbol = bandwidth > 0.25 ? 2.0 : 4.0;
  const double base_bw = (1.0 + spec.rrc_rolloff) / spec.samples_per_symbol;
  const double rate = base_bw / bandwidth;
  const std::size_t ramp = 2 * spec.filter_span * static_cast<std::size_t>(spec.samples_per_symbol);
  const std::size_t len = base_length(num_samples, rate) + 2 * ramp;
  const auto num_symbols = static_cast<std::size_t>(std::ceil(static_cast<double>(len) / spec.samples_per_symbol));
  const Samples raw = synthesize_linear(spec, num_symbols, rng);
  out.samples = resample_window(raw, rate, ramp + kGuard, num_samples);
  return out;
}

}  // namespace wbsig::modem
