#pragma once

#include <cstdint>
#include <string_view>
#include <optional>
#include <vector>

#include "wbsig/dsp.hpp"
#include "wbsig/signal_class.hpp"

namespace wbsig {

/// One labelled signal: a time-frequency rectangle in normalized units.
/// Time is a fraction of the example, frequency is in cycles/sample.
struct SignalAnnotation {
  SignalClass signal_class = SignalClass::BPSK;
  ModFamily family = ModFamily::PSK;
  double t_start = 0.0;
  double duration = 0.0;
  double f_center = 0.0;
  double bandwidth = 0.0;
  double snr_db = 0.0;

  double t_stop() const { return t_start + duration; }
  double f_low() const { return f_center - 0.5 * bandwidth; }
  double f_high() const { return f_center + 0.5 * bandwidth; }

  bool operator==(const SignalAnnotation&) const = default;
};

SignalAnnotation make_annotation(SignalClass c, double t_start, double duration, double f_center,
                                 double bandwidth, double snr_db);

/// Box invariants: positive extent, t in [0, 1], f within (-0.5, 0.5).
bool annotation_valid(const SignalAnnotation& a, double tolerance = 1e-9);

/// True when the two rectangles share a region of positive area.
bool annotations_overlap(const SignalAnnotation& a, const SignalAnnotation& b);

enum class DatasetVariant : std::uint8_t { CleanTrain = 0, CleanVal = 1, ImpairedTrain = 2, ImpairedVal = 3 };

std::string_view variant_name(DatasetVariant v);
std::optional<DatasetVariant> variant_from_name(std::string_view name);
bool variant_is_impaired(DatasetVariant v);

struct ExampleMeta {
  std::uint64_t seed = 0;
  DatasetVariant split = DatasetVariant::CleanTrain;
  bool impaired = false;
  /// Current noise-floor PSD. Starts at 1 and grows when AWGN is added.
  double noise_psd = 1.0;
  /// Bitmask of applied impairments (see impairments.hpp).
  std::uint32_t applied = 0;

  bool operator==(const ExampleMeta&) const = default;
};

struct WidebandExample {
  Samples iq;
  std::vector<SignalAnnotation> annotations;
  ExampleMeta meta;

  std::size_t size() const { return iq.size(); }
};

}  // namespace wbsig
