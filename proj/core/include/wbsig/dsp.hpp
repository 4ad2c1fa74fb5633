#pragma once

// Complex baseband primitives shared by every other module.
//
// Conventions:
//  * All frequencies are in cycles/sample; the valid band is [-0.5, 0.5).
//  * fft() is unscaled, ifft() carries the 1/N factor.
//  * Spectrogram rows are FFT-shifted: row 0 is -0.5 cycles/sample and the
//    centre row holds DC. Column 0 is the earliest segment.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace wbsig {

using Complex = std::complex<double>;
using Samples = std::vector<Complex>;

class Rng;

namespace dsp {

// --- FFT -------------------------------------------------------------------

/// Forward DFT in place, no scaling.
void fft(std::span<Complex> data);
/// Inverse DFT in place, scaled by 1/N.
void ifft(std::span<Complex> data);

/// Frequency (cycles/sample, in [-0.5, 0.5)) of DFT bin k of an n-point FFT.
double bin_frequency(std::size_t k, std::size_t n);

// --- Filters ---------------------------------------------------------------

enum class FilterKind { Lowpass, RootRaisedCosine, Gaussian };

struct FilterSpec {
  FilterKind kind = FilterKind::Lowpass;
  /// Lowpass: cutoff in cycles/sample. RRC and Gaussian: symbol rate
  /// (1 / samples-per-symbol) in cycles/sample.
  double rate = 0.25;
  /// RRC roll-off in [0, 1], or Gaussian bandwidth-time product.
  double shape = 0.0;
  std::size_t num_taps = 63;
  /// Kaiser stopband attenuation for lowpass designs.
  double attenuation_db = 60.0;

  static FilterSpec lowpass(double cutoff, std::size_t num_taps, double attenuation_db = 60.0) {
    return {FilterKind::Lowpass, cutoff, 0.0, num_taps, attenuation_db};
  }
  static FilterSpec root_raised_cosine(double samples_per_symbol, double rolloff,
                                       std::size_t num_taps) {
    return {FilterKind::RootRaisedCosine, 1.0 / samples_per_symbol, rolloff, num_taps, 0.0};
  }
  static FilterSpec gaussian(double samples_per_symbol, double bt, std::size_t num_taps) {
    return {FilterKind::Gaussian, 1.0 / samples_per_symbol, bt, num_taps, 0.0};
  }
};

/// Symmetric linear-phase taps. Lowpass taps have unit DC gain, RRC taps
/// unit energy, Gaussian taps unit sum.
std::vector<double> design_filter(const FilterSpec& spec);

double kaiser_beta(double attenuation_db);
/// Tap count giving the requested attenuation over a transition band of
/// `transition_width` cycles/sample (always odd).
std::size_t kaiser_length(double attenuation_db, double transition_width);
std::vector<double> kaiser_window(std::size_t n, double beta);

/// Periodic 4-term Blackman-Harris window.
std::vector<double> blackman_harris(std::size_t n);

enum class ConvolveMode {
  Full,    ///< length n + m - 1
  Same,    ///< length n, centred on the filter's midpoint (zero group delay)
  Causal,  ///< length n, first n outputs of the full convolution
};

Samples convolve(std::span<const Complex> x, std::span<const double> taps,
                 ConvolveMode mode = ConvolveMode::Same);
Samples convolve(std::span<const Complex> x, std::span<const Complex> taps,
                 ConvolveMode mode = ConvolveMode::Same);

// --- Translation / resampling ---------------------------------------------

/// out[n] = in[n] * exp(j 2 pi f0 n). Requires |f0| < 1.
Samples frequency_translate(std::span<const Complex> x, double f0);

struct ResampleOptions {
  /// Highest |frequency| the caller needs preserved, in input cycles/sample.
  /// When set and rate < 1, content that cannot be represented at the new
  /// rate is reported as a ParameterError instead of being filtered away.
  std::optional<double> occupied_half_band;
  double attenuation_db = 70.0;
};

/// Arbitrary-ratio polyphase resampler (Kaiser-windowed sinc prototype).
/// `rate` is new_rate / old_rate; output length is round(len * rate) and
/// output sample n sits at input time n / rate.
Samples resample(std::span<const Complex> x, double rate, const ResampleOptions& options = {});

// --- Spectrogram -----------------------------------------------------------

struct SpectrogramConfig {
  std::size_t fft_size = 512;
  std::size_t segment_length = 512;
  std::size_t overlap = 0;
};

/// Complex time-frequency matrix, stored row-major (rows = frequency).
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Complex& at(std::size_t row, std::size_t col) { return values_[row * cols_ + col]; }
  const Complex& at(std::size_t row, std::size_t col) const { return values_[row * cols_ + col]; }

  std::span<Complex> values() { return values_; }
  std::span<const Complex> values() const { return values_; }

  bool operator==(const Spectrogram&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> values_;
};

Spectrogram spectrogram(std::span<const Complex> x, const SpectrogramConfig& config = {});

// --- Power -----------------------------------------------------------------

/// Half-open sample range [begin, end).
struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Half-open frequency band [low, high) in cycles/sample.
struct FrequencyBand {
  double low = -0.5;
  double high = 0.5;
};

struct BandMeasurement {
  double power = 0.0;        ///< mean power of the band-limited region
  std::size_t bins = 0;      ///< FFT bins inside the band
  std::size_t length = 0;    ///< samples in the region (FFT length)
};

/// Mean |x|^2 over the selected region. Band selection masks FFT bins.
double measure_power(std::span<const Complex> x, std::optional<SampleRange> span = std::nullopt,
                     std::optional<FrequencyBand> band = std::nullopt);

/// Same as measure_power with a band, also reporting how many bins were used.
BandMeasurement measure_band(std::span<const Complex> x, SampleRange span, FrequencyBand band);

double mean_power(std::span<const Complex> x);

/// Throws ParameterError if any sample is NaN or infinite.
void require_finite(std::span<const Complex> x, const char* what = "samples");

/// Circular white Gaussian noise with E|n|^2 == variance (PSD == variance).
Samples complex_noise(std::size_t n, double variance, Rng& rng);

}  // namespace dsp
}  // namespace wbsig
