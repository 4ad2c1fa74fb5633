#pragma once

// Randomized wideband scene planning and rendering.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wbsig/example.hpp"

namespace wbsig {

class Rng;

struct BurstyParams {
  double burst_duration = 0.1;      ///< fraction of the example, [0.05, 0.2]
  double silence_multiplier = 2.0;  ///< silence = multiplier * burst, [1, 3]

  bool operator==(const BurstyParams&) const = default;
};

struct HoppingParams {
  int num_channels = 2;  ///< [2, 16], spaced one bandwidth apart

  bool operator==(const HoppingParams&) const = default;
};

/// One contiguous on-air interval of a source.
struct Emission {
  double t_start = 0.0;
  double t_stop = 0.0;
  double f_center = 0.0;

  bool operator==(const Emission&) const = default;
};

struct SourcePlan {
  SignalClass signal_class = SignalClass::BPSK;
  double snr_db = 0.0;
  double f_center = 0.0;
  double bandwidth = 0.0;
  double start = 0.0;
  double stop = 1.0;
  std::optional<BurstyParams> bursty;
  std::optional<HoppingParams> hopping;
  /// Resolved on-air intervals, aligned to the sample grid.
  std::vector<Emission> emissions;

  /// Total occupied frequency span (all hop channels for hopping sources).
  double footprint() const;

  bool operator==(const SourcePlan&) const = default;
};

struct SceneSpec {
  std::size_t num_iq_samples = 262144;
  int min_sources = 1;
  int max_sources = 6;
  double snr_min_db = 20.0;
  double snr_max_db = 40.0;
  double ofdm_weight = 2.0;
  double p_bursty = 0.2;
  double p_hopping = 0.2;
  double p_partial_extent = 0.2;
  double f_center_limit = 0.4;
  double ofdm_bw_min = 0.2;
  double ofdm_bw_max = 0.7;
  double bw_min = 0.0125;
  double bw_max = 0.45;

  static SceneSpec clean() { return {}; }
  static SceneSpec impaired() {
    SceneSpec s;
    s.snr_min_db = 0.0;
    s.snr_max_db = 30.0;
    return s;
  }

  /// Throws ParameterError on degenerate or inconsistent ranges.
  void validate() const;
};

/// Draws 1..6 sources with non-overlapping frequency footprints. Sources
/// that cannot be placed are dropped; at least one source always remains.
std::vector<SourcePlan> plan_scene(const SceneSpec& spec, Rng& rng);

/// One annotation per emission (bursts and hop dwells are separate signals).
std::vector<SignalAnnotation> plan_annotations(const SourcePlan& plan);

/// Synthesizes every emission over a unit-PSD complex noise floor, scaled so
/// mean power equals 10^(snr/10) * bandwidth.
WidebandExample render_example(std::span<const SourcePlan> plans, const SceneSpec& spec, Rng& rng);

/// Floor value reported when no signal power is measured above the noise.
inline constexpr double kEsN0FloorDb = -100.0;

/// In-band, in-span power minus the expected noise power, relative to the
/// expected noise power, in dB. Uses meta.noise_psd as the floor.
double measure_es_n0(const WidebandExample& example, const SignalAnnotation& annotation);

}  // namespace wbsig
