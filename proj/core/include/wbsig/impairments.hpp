#pragma once

// Example-level RF impairments with annotation bookkeeping. Every transform
// returns a new example and preserves its length.

#include <array>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "wbsig/example.hpp"

namespace wbsig {

class Rng;

namespace impair {

/// Bits recorded in ExampleMeta::applied.
enum AppliedBit : std::uint32_t {
  kTimeShift = 1u << 0,
  kFrequencyShift = 1u << 1,
  kResample = 1u << 2,
  kSpectralInversion = 1u << 3,
  kAwgn = 1u << 4,
  kMagnitudeRescale = 1u << 5,
  kRfRolloff = 1u << 6,
  kRandomConvolve = 1u << 7,
  kRayleighFading = 1u << 8,
  kDropSamples = 1u << 9,
  kPhaseShift = 1u << 10,
  kIqImbalance = 1u << 11,
};

enum class RfImpairment : std::uint8_t {
  MagnitudeRescale,
  RfRolloff,
  RandomConvolve,
  RayleighFading,
  DropSamples,
  PhaseShift,
  IqImbalance,
};

inline constexpr std::size_t kNumRfImpairments = 7;
inline constexpr std::array<RfImpairment, kNumRfImpairments> kAllRfImpairments = {
    RfImpairment::MagnitudeRescale, RfImpairment::RfRolloff,   RfImpairment::RandomConvolve,
    RfImpairment::RayleighFading,   RfImpairment::DropSamples, RfImpairment::PhaseShift,
    RfImpairment::IqImbalance};

std::string_view rf_impairment_name(RfImpairment v);
std::uint32_t applied_bit(RfImpairment v);

// --- Per-variant parameters -------------------------------------------------

struct MagnitudeRescaleParams {
  std::size_t start = 0;  ///< first sample scaled
  double gain = 1.0;      ///< [0.5, 2]
};

struct RfRolloffParams {
  bool high_edge = true;     ///< roll off the upper (true) or lower band edge
  double width = 0.05;       ///< cycles/sample from the edge, (0, 0.05]
  double edge_atten_db = 20; ///< attenuation reached at the band edge
};

struct RandomConvolveParams {
  std::vector<double> taps;  ///< values in [0, 1], scaled to unit energy
  double alpha = 0.5;        ///< blend weight of the filtered signal
};

struct RayleighFadingParams {
  std::vector<Complex> taps;  ///< unit total power
};

enum class DropFill : std::uint8_t { FrontFill, BackFill, Mean, Zero };

struct DropRegion {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct DropSamplesParams {
  std::vector<DropRegion> regions;
  DropFill fill = DropFill::Zero;
};

struct PhaseShiftParams {
  double phase = 0.0;  ///< radians
};

struct IqImbalanceParams {
  double amplitude_db = 0.0;  ///< I gain relative to Q, [-3, 3] dB
  double phase_rad = 0.0;     ///< quadrature skew, [-5, 5] degrees
  Complex dc_offset{};        ///< absolute offset added after the skew
};

using RfParams = std::variant<MagnitudeRescaleParams, RfRolloffParams, RandomConvolveParams,
                              RayleighFadingParams, DropSamplesParams, PhaseShiftParams, IqImbalanceParams>;

RfImpairment rf_params_kind(const RfParams& params);

/// Draws parameters for `variant` from the documented ranges. `rms` is the
/// example's RMS amplitude (used by the DC offset).
RfParams draw_rf_params(RfImpairment variant, std::size_t length, double rms, Rng& rng);

WidebandExample apply_rf_impairment(const WidebandExample& x, const RfParams& params);
WidebandExample apply_rf_impairment(const WidebandExample& x, RfImpairment variant, Rng& rng);

// --- Pipeline ---------------------------------------------------------------

struct ImpairmentConfig {
  double p_time_shift = 0.25;
  double p_freq_shift = 0.25;
  double p_resample = 0.25;
  double p_spectral_inversion = 0.5;
  double p_awgn = 1.0;
  std::size_t randaugment_count = 2;
  double p_magnitude_rescale = 0.5;
  std::vector<RfImpairment> pool{kAllRfImpairments.begin(), kAllRfImpairments.end()};

  double max_time_shift = 0.1;   ///< fraction of the example
  double max_freq_shift = 0.2;   ///< cycles/sample
  double resample_min = 0.75;
  double resample_max = 1.5;
  double awgn_min_db = -20.0;    ///< added noise PSD relative to the floor
  double awgn_max_db = 0.0;

  void validate() const;
};

/// Shifts samples by `shift` (positive = later). The vacated region is filled
/// with noise at the current floor; boxes move and are clipped or dropped.
WidebandExample time_shift(const WidebandExample& x, std::ptrdiff_t shift, Rng& rng);

/// Moves all content by f0 cycles/sample. When a box would cross the band
/// edge the shift runs at twice the sample rate and is low-passed before
/// decimation so nothing wraps around; clipped boxes are trimmed or dropped.
WidebandExample frequency_shift(const WidebandExample& x, double f0, Rng& rng);

/// Smallest rate that keeps every scaled box within the band.
double min_resample_rate(const std::vector<SignalAnnotation>& annotations);

/// Resamples by `rate` (clamped by min_resample_rate), then pads with noise
/// or truncates back to the original length. The noise floor PSD is kept.
WidebandExample random_resample(const WidebandExample& x, double rate, Rng& rng);

WidebandExample spectral_inversion(const WidebandExample& x);

/// Adds white noise whose PSD is `added_db` relative to the current floor.
/// A value of -infinity is a no-op.
WidebandExample add_awgn(const WidebandExample& x, double added_db, Rng& rng);

/// Draws `randaugment_count` distinct variants from the pool.
std::vector<RfImpairment> select_rand_augment(const ImpairmentConfig& cfg, Rng& rng);

WidebandExample rand_augment(const WidebandExample& x, const ImpairmentConfig& cfg, Rng& rng);

/// Time shift, frequency shift, resample, spectral inversion, RandAugment,
/// then AWGN, each gated by its probability.
WidebandExample impair_example(const WidebandExample& x, const ImpairmentConfig& cfg, Rng& rng);

}  // namespace impair
}  // namespace wbsig
