#include "wbsig/dsp.hpp"
#include "wbsig/error.hpp"

namespace wbsig::dsp {

Spectrogram spectrogram(std::span<const Complex> x, const SpectrogramConfig& config) {
  detail::require(config.fft_size > 0 && config.fft_size == config.segment_length,
                  "spectrogram: fft_size must equal segment_length");
  detail::require(config.overlap < config.segment_length, "spectrogram: overlap must be < segment_length");
  detail::require(x.size() >= config.segment_length, "spectrogram: buffer shorter than one segment");

  const std::size_t n = config.fft_size;
  const std::size_t hop = config.segment_length - config.overlap;
  const std::size_t cols = (x.size() - config.segment_length) / hop + 1;
  const auto window = blackman_harris(n);
  const std::size_t shift = (n + 1) / 2;  // bin of row 0

  Spectrogram out(n, cols);
  Samples segment(n);
  for (std::size_t c = 0; c < cols; ++c) {
    const std::size_t start = c * hop;
    for (std::size_t k = 0; k < n; ++k) segment[k] = x[start + k] * window[k];
    fft(segment);
    for (std::size_t r = 0; r < n; ++r) out.at(r, c) = segment[(r + shift) % n];
  }
  return out;
}

}  // namespace wbsig::dsp
