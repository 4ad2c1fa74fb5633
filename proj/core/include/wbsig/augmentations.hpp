#pragma once

// Training-time IQ augmentations and two-example mixing.

#include <array>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "wbsig/example.hpp"

namespace wbsig {

class Rng;

namespace augment {

enum class IqAugmentation : std::uint8_t {
  TimeReversal,
  ChannelSwap,
  AmplitudeReversal,
  Quantize,
  CutOut,
  PatchShuffle,
  LoDrift,
  TimeVaryingNoise,
  Clip,
  AddSlope,
  GainDrift,
  Agc,
};

inline constexpr std::size_t kNumIqAugmentations = 12;
std::string_view iq_augmentation_name(IqAugmentation v);

struct TimeReversalParams {
  /// Conjugate as well, so the spectrum keeps its orientation.
  bool undo_spectral_inversion = false;
};
struct ChannelSwapParams {};
struct AmplitudeReversalParams {};

enum class QuantizeRounding : std::uint8_t { Floor, Middle, Ceiling };
struct QuantizeParams {
  int levels = 16;
  QuantizeRounding rounding = QuantizeRounding::Floor;
};

enum class CutOutFill : std::uint8_t { Zeros, Ones, LowNoise, AverageNoise, HighNoise };
struct CutOutParams {
  double t_start = 0.0;
  double duration = 0.1;
  CutOutFill fill = CutOutFill::Zeros;
};

struct PatchShuffleParams {
  std::size_t patch_size = 8;
  double shuffle_ratio = 0.05;  ///< fraction of patches shuffled
};

struct LoDriftParams {
  double max_drift = 0.005;    ///< cycles/sample
  double drift_rate = 2e-6;    ///< random-walk step size, cycles/sample
};

struct TimeVaryingNoiseParams {
  double low_db = -20.0;       ///< added PSD relative to the floor
  double high_db = -5.0;
  int inflections = 2;
};

struct ClipParams {
  double percent = 0.9;  ///< bounds are this fraction of each axis' max and min
};

struct AddSlopeParams {};

struct GainDriftParams {
  double max_drift_db = 3.0;
  double drift_rate_db = 0.01;  ///< random-walk step, dB per sample
};

struct AgcParams {
  double initial_gain_db = 0.0;
  double alpha_smooth = 0.0;    ///< level-estimate update weight
  double alpha_track = 0.0;     ///< gain update while within track range
  double alpha_overflow = 0.0;  ///< gain update when above high_level_db
  double alpha_acquire = 0.0;   ///< gain update while outside track range
  double ref_level_db = 0.0;
  double track_range_db = 1.0;
  double low_level_db = -80.0;  ///< below this level the gain is held
  double high_level_db = 10.0;
};

using IqAugParams = std::variant<TimeReversalParams, ChannelSwapParams, AmplitudeReversalParams, QuantizeParams,
                                 CutOutParams, PatchShuffleParams, LoDriftParams, TimeVaryingNoiseParams, ClipParams,
                                 AddSlopeParams, GainDriftParams, AgcParams>;

IqAugmentation iq_params_kind(const IqAugParams& params);

IqAugParams draw_iq_params(IqAugmentation variant, const WidebandExample& x, Rng& rng);

/// Applies one augmentation. `rng` feeds the stochastic parts (noise fills,
/// shuffles, random walks); deterministic variants ignore it.
WidebandExample apply_iq_augmentation(const WidebandExample& x, const IqAugParams& params, Rng& rng);
WidebandExample apply_iq_augmentation(const WidebandExample& x, IqAugmentation variant, Rng& rng);

/// Per-sample frequency offsets used by LoDrift.
std::vector<double> lo_drift_offsets(std::size_t length, const LoDriftParams& params, Rng& rng);

// --- Interval bookkeeping -----------------------------------------------------

/// Removes [t0, t1) from every box, splitting boxes that straddle it.
std::vector<SignalAnnotation> subtract_interval(const std::vector<SignalAnnotation>& boxes, double t0, double t1);

/// Keeps the part of every box inside [t0, t1).
std::vector<SignalAnnotation> intersect_interval(const std::vector<SignalAnnotation>& boxes, double t0, double t1);

// --- Mixing --------------------------------------------------------------------

enum class MixVariant : std::uint8_t { MixUp, CutMix };

/// x + weight * y, with y's boxes appended when weight > 0.
WidebandExample mix_up(const WidebandExample& x, const WidebandExample& y, double weight);

/// Replaces x's samples in [t_start, t_start + duration) with y's.
WidebandExample cut_mix(const WidebandExample& x, const WidebandExample& y, double t_start, double duration);

/// Random weight in (0, 1) for MixUp, random region for CutMix.
WidebandExample mix_augmentation(const WidebandExample& x, const WidebandExample& y, MixVariant variant, Rng& rng);

}  // namespace augment
}  // namespace wbsig
