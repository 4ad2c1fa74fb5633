#pragma once

// Augmentations that operate on spectrograms. Boxes use the same normalized
// coordinates as IQ annotations: t spans the columns, f + 0.5 spans the rows.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "wbsig/dsp.hpp"
#include "wbsig/example.hpp"

namespace wbsig {

class Rng;

namespace augment {

struct SpecSample {
  dsp::Spectrogram spectrogram;
  std::vector<SignalAnnotation> annotations;
  /// Source samples; required by RandomResizeCrop only.
  std::optional<Samples> iq;
};

/// Canonical 512 x 512 spectrogram of an example.
SpecSample to_spec_sample(const WidebandExample& x, bool keep_iq = false);

enum class SpecAugmentation : std::uint8_t {
  Resize,
  SpecDropSamples,
  SpecPatchShuffle,
  Translation,
  RandomResizeCrop,
  MosaicCrop,
  MosaicDownsample,
};

inline constexpr std::size_t kNumSpecAugmentations = 7;
std::string_view spec_augmentation_name(SpecAugmentation v);

struct ResizeParams {
  std::size_t rows = 512;
  std::size_t cols = 512;
};

enum class SpecDropFill : std::uint8_t { FrontFill, BackFill, Mean, Zero, Low, Min, Max, Ones };

struct SpecDropSamplesParams {
  double drop_rate = 0.01;      ///< fraction of pixels dropped
  std::size_t max_region = 16;  ///< region length along time, in pixels
  SpecDropFill fill = SpecDropFill::Zero;
};

struct SpecPatchShuffleParams {
  std::size_t patch_size = 8;
  double shuffle_ratio = 0.05;
};

struct TranslationParams {
  std::ptrdiff_t col_shift = 0;  ///< positive moves content later in time
  std::ptrdiff_t row_shift = 0;  ///< positive moves content up in frequency
};

struct RandomResizeCropParams {
  std::size_t fft_size = 512;  ///< 256, 512 or 1024; segment length matches
  std::size_t row_offset = 0;  ///< crop origin when the result is larger
  std::size_t col_offset = 0;
};

struct MosaicCropParams {
  std::size_t row_offset = 0;  ///< window origin inside the 2x2 grid
  std::size_t col_offset = 0;
};

struct MosaicDownsampleParams {};

using SpecAugParams = std::variant<ResizeParams, SpecDropSamplesParams, SpecPatchShuffleParams, TranslationParams,
                                   RandomResizeCropParams, MosaicCropParams, MosaicDownsampleParams>;

SpecAugmentation spec_params_kind(const SpecAugParams& params);

SpecAugParams draw_spec_params(SpecAugmentation variant, const SpecSample& s, Rng& rng);

/// Mosaic variants need exactly three extras (grid quadrants 1..3, with the
/// input in the top-left); every other variant needs none. Quadrant q sits at
/// rows (q / 2) * R and columns (q % 2) * C of the grid.
SpecSample apply_spec_augmentation(const SpecSample& s, const SpecAugParams& params,
                                   std::span<const SpecSample> extras, Rng& rng);
SpecSample apply_spec_augmentation(const SpecSample& s, SpecAugmentation variant,
                                   std::span<const SpecSample> extras, Rng& rng);

/// Median power of pixels outside every box (all pixels when none are free).
double background_power(const SpecSample& s);

}  // namespace augment
}  // namespace wbsig
