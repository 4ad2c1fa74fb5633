#pragma once

// Oracles and fixtures shared by the unit tests and the acceptance runner.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wbsig/example.hpp"
#include "wbsig/metrics.hpp"
#include "wbsig/rng.hpp"

namespace wbsig::testing {

Samples tone(std::size_t n, double f, double amplitude = 1.0, double phase = 0.0);

/// Frequency of the largest FFT bin.
double peak_frequency(std::span<const Complex> x);

/// Band power relative to total power in dB, via FFT masking.
double band_power_db(std::span<const Complex> x, double f_low, double f_high);

struct ToneSource {
  double f = 0.0;
  double t_start = 0.0;
  double duration = 1.0;
  double label_bandwidth = 0.02;
  double power = 1e4;
};

/// Unit-PSD noise floor plus time-gated tones; one annotation per tone
/// (labelled BPSK so the class round-trips through every granularity).
WidebandExample tone_example(std::size_t n, std::span<const ToneSource> tones, Rng& rng);

/// One tone at a random frequency and extent, clear of the band edges.
ToneSource random_tone(Rng& rng);

struct Localization {
  double t_center = 0.0;
  double f_center = 0.0;
};

/// Energy-detection oracle: inside the annotation's box widened by
/// `margin`, finds the strongest spectrogram row and the span of columns
/// where that row is at least 20 dB above the median pixel power.
std::optional<Localization> localize(const WidebandExample& x, const SignalAnnotation& a, double margin = 0.03);

struct ChainOutcome {
  std::size_t checked = 0;
  std::size_t failed = 0;
  std::size_t edge_clipped = 0;
  std::string first_failure;
};

/// One default impairment chain on a single random tone at full length;
/// every surviving annotation must be re-localized within `tolerance`.
/// An annotation clipped at Nyquist is counted in `edge_clipped` and only
/// checked for a well-formed band: the tone's carrier may lie beyond the
/// edge, leaving a labelled sliver with no energy in it.
ChainOutcome run_bookkeeping_chain(Rng& rng, double tolerance = 0.02);

/// Noise-free band-limited source on [0.25, 0.45) shifted by +0.2: power
/// that wrapped into [-0.5, -0.35) relative to the total, in dB.
double frequency_shift_image_db(Rng& rng);

/// RRC loopback with known timing: modulate, add noise at `es_n0_db`,
/// matched filter, sample, nearest-point decision. Returns symbol errors.
std::size_t loopback_symbol_errors(SignalClass c, std::size_t num_symbols, double es_n0_db, Rng& rng);

/// Direct-definition COCO evaluation: greedy matching per image and
/// threshold, precision at each recall level as the maximum precision over
/// all cutoffs reaching it.
metrics::EvalReport reference_evaluate(const metrics::Detections& preds, const metrics::GroundTruth& truth,
                                       const metrics::EvalConfig& cfg = {});

struct MetricsInstance {
  metrics::Detections preds;
  metrics::GroundTruth truth;
};

/// Up to `max_truth` truth and `max_preds` predictions over a few examples
/// and classes, with box sizes straddling the area buckets.
MetricsInstance random_metrics_instance(Rng& rng, std::size_t max_truth = 5, std::size_t max_preds = 5);

/// Random boxes on the 512 x 512 grid with at least one clear pixel between
/// any two of them.
std::vector<SignalAnnotation> random_separated_boxes(Rng& rng, std::size_t max_boxes = 6);

/// Upper 1% point of the chi-square distribution with `dof` degrees of freedom (1..10).
double chi_square_critical_01(std::size_t dof);

/// Max absolute difference over all report fields; infinity when one side
/// is defined and the other is not.
double report_distance(const metrics::EvalReport& a, const metrics::EvalReport& b);

}  // namespace wbsig::testing
