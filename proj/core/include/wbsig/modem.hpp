#pragma once

// Baseband synthesis for the 53 signal classes.

#include <cstddef>
#include <span>
#include <vector>

#include "wbsig/dsp.hpp"
#include "wbsig/signal_class.hpp"

namespace wbsig {
class Rng;
}

namespace wbsig::modem {

/// Constellation points with unit mean energy. Only ASK/PAM/PSK/QAM classes
/// are supported; FSK and OFDM classes raise ParameterError.
std::vector<Complex> build_constellation(SignalClass c);

// --- Linear (ASK/PAM/PSK/QAM) ----------------------------------------------

struct LinearModSpec {
  std::vector<Complex> constellation;
  double samples_per_symbol = 4.0;
  double rrc_rolloff = 0.35;
  /// Half-length of the RRC pulse in symbols.
  std::size_t filter_span = 8;
};

/// RRC pulse used by modulate_linear for an integer samples-per-symbol,
/// scaled so unit-energy symbols give unit mean power.
std::vector<double> linear_pulse(std::size_t samples_per_symbol, double rolloff, std::size_t span);

/// Pulse-shapes the given symbol indices. Returns the full convolution:
/// symbol k peaks at k * sps + span * sps. Non-integer samples-per-symbol is
/// produced at floor(sps) and resampled.
Samples modulate_linear(const LinearModSpec& spec, std::span<const std::size_t> symbols);

/// Draws num_symbols iid symbols uniformly over the constellation.
Samples synthesize_linear(const LinearModSpec& spec, std::size_t num_symbols, Rng& rng);

// --- FSK family ------------------------------------------------------------

enum class FskVariant { Fsk, Gfsk, Msk, Gmsk };

struct FskSpec {
  FskVariant variant = FskVariant::Fsk;
  int levels = 2;                 ///< 2, 4, 8 or 16
  double modulation_index = 1.0;  ///< ignored (forced to 0.5) for MSK/GMSK
  double gaussian_bt = 0.35;      ///< used by GFSK/GMSK only
  double samples_per_symbol = 8.0;

  /// Index actually applied by the modulator.
  double effective_index() const;
  bool gaussian() const { return variant == FskVariant::Gfsk || variant == FskVariant::Gmsk; }
};

/// Per-class defaults: FSK/GFSK h = 1, MSK/GMSK h = 0.5, BT drawn from
/// [0.3, 0.5] for Gaussian variants.
FskSpec fsk_spec_for(SignalClass c, double samples_per_symbol, Rng& rng);

/// Continuous-phase FSK for the given symbol indices (0..levels-1). Output
/// length is ceil(num_symbols * sps), constant unit envelope.
Samples modulate_fsk(const FskSpec& spec, std::span<const std::size_t> symbols);

Samples synthesize_fsk(const FskSpec& spec, std::size_t num_symbols, Rng& rng);

/// Occupied bandwidth (cycles/sample) recorded for an FSK signal: the span
/// between the outer tones widened by one symbol rate.
double fsk_occupied_bandwidth(const FskSpec& spec);

// --- OFDM ------------------------------------------------------------------

enum class SidelobeSuppression { None, TimeWindowing, EdgeNulling };

struct OfdmSpec {
  int num_subcarriers = 64;
  double cp_ratio = 0.125;
  bool dc_subcarrier = true;  ///< false forces the DC bin to zero
  SidelobeSuppression sidelobe = SidelobeSuppression::None;
  bool enable_pilots = false;
  bool enable_resource_blocks = false;
  bool enable_bursty_symbols = false;

  /// IFFT length; subcarriers fill the centre half of the band.
  std::size_t fft_size() const { return 2 * static_cast<std::size_t>(num_subcarriers); }
  std::size_t cp_length() const;
};

/// Randomized realism settings for an OFDM class.
OfdmSpec random_ofdm_spec(SignalClass c, Rng& rng);

struct OfdmWaveform {
  Samples samples;
  std::size_t fft_size = 0;
  std::size_t cp_length = 0;
  /// Frequency-domain symbols, one fft_size vector per OFDM symbol (bin order).
  std::vector<Samples> grid;
  std::vector<bool> symbol_active;
  /// time-domain symbol = ifft(grid) * scale.
  double scale = 1.0;
  /// Occupied-subcarrier span as a fraction of the sample rate.
  double occupied_bandwidth = 0.0;
};

OfdmWaveform synthesize_ofdm(const OfdmSpec& spec, std::size_t num_symbols, Rng& rng);

// --- Class-level synthesis -------------------------------------------------

struct SourceWaveform {
  Samples samples;
  /// Occupied bandwidth in cycles/sample, equal to the requested bandwidth.
  double bandwidth = 0.0;
};

/// Synthesizes `num_samples` of class `c` occupying `bandwidth` cycles/sample
/// centred on DC. The waveform is built at a convenient base rate and moved
/// to the requested bandwidth by resampling.
SourceWaveform synthesize_at_bandwidth(SignalClass c, double bandwidth, std::size_t num_samples,
                                       Rng& rng);

}  // namespace wbsig::modem
