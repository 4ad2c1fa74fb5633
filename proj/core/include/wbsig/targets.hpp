#pragma once

// Model-ready targets: center-form boxes and semantic masks on the
// 512 x 512 spectrogram grid, plus mask post-processing.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wbsig/example.hpp"

namespace wbsig::targets {

enum class LabelGranularity : std::uint8_t { Fine53, Family6, Detection1 };

std::size_t num_labels(LabelGranularity g);

/// Fine53: class index; Family6: ASK 0, FSK 1, OFDM 2, PAM 3, PSK 4, QAM 5;
/// Detection1: 0.
int label_index(SignalClass c, LabelGranularity g);

/// Normalized center-form box: t_c and d in fractions of the example,
/// f_c and b in cycles/sample.
struct BoxTarget {
  double t_c = 0.0;
  double f_c = 0.0;
  double d = 0.0;
  double b = 0.0;
  int class_index = 0;
  std::optional<double> score;

  double t0() const { return t_c - 0.5 * d; }
  double t1() const { return t_c + 0.5 * d; }
  double f0() const { return f_c - 0.5 * b; }
  double f1() const { return f_c + 0.5 * b; }

  bool operator==(const BoxTarget&) const = default;
};

BoxTarget to_box(const SignalAnnotation& a, LabelGranularity g);
std::vector<BoxTarget> to_boxes(std::span<const SignalAnnotation> annotations, LabelGranularity g);
std::vector<BoxTarget> to_boxes(const WidebandExample& x, LabelGranularity g);

/// Half-open pixel rectangle.
struct PixelBox {
  std::size_t row0 = 0, row1 = 0;
  std::size_t col0 = 0, col1 = 0;

  std::size_t area() const { return (row1 - row0) * (col1 - col0); }
};

/// Columns [floor(t0 * cols), ceil(t1 * cols)); rows use f + 0.5 the same way.
PixelBox box_pixels(const BoxTarget& box, std::size_t rows = 512, std::size_t cols = 512);

/// Channel-major stack of rows x cols planes. Values are 0/1 for targets and
/// probabilities for predictions.
class MaskTarget {
 public:
  MaskTarget() = default;
  MaskTarget(std::size_t channels, std::size_t rows, std::size_t cols)
      : channels_(channels), rows_(rows), cols_(cols), values_(channels * rows * cols, 0.0f) {}

  std::size_t channels() const { return channels_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  float& at(std::size_t ch, std::size_t r, std::size_t c) { return values_[(ch * rows_ + r) * cols_ + c]; }
  float at(std::size_t ch, std::size_t r, std::size_t c) const { return values_[(ch * rows_ + r) * cols_ + c]; }

  std::span<float> values() { return values_; }
  std::span<const float> values() const { return values_; }

 private:
  std::size_t channels_ = 0, rows_ = 0, cols_ = 0;
  std::vector<float> values_;
};

/// One channel for Detection1, one per label otherwise.
MaskTarget to_mask(std::span<const SignalAnnotation> annotations, LabelGranularity g, std::size_t rows = 512,
                   std::size_t cols = 512);
MaskTarget to_mask(const WidebandExample& x, LabelGranularity g);

/// Tight boxes around the 4-connected components of each channel
/// (value >= threshold). class_index is the channel.
std::vector<BoxTarget> mask_to_boxes(const MaskTarget& mask, double threshold = 0.5);

/// Mean probability inside the box's pixel rectangle on one channel.
double box_score_from_mask(const MaskTarget& prob, const BoxTarget& box, std::size_t channel = 0);

}  // namespace wbsig::targets
