#pragma once

// COCO-convention detection metrics over normalized time-frequency boxes.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wbsig/targets.hpp"

namespace wbsig::metrics {

using targets::BoxTarget;
using targets::LabelGranularity;

struct PredBox {
  std::size_t example_index = 0;
  BoxTarget box;
  double score = 0.0;
};

struct TruthBox {
  std::size_t example_index = 0;
  BoxTarget box;
  std::optional<double> snr_db;
};

struct Detections {
  LabelGranularity granularity = LabelGranularity::Fine53;
  std::vector<PredBox> boxes;
};

struct GroundTruth {
  LabelGranularity granularity = LabelGranularity::Fine53;
  std::vector<TruthBox> boxes;
};

/// Truth boxes of consecutive examples, tagged with their annotation SNRs.
GroundTruth truth_from_examples(std::span<const WidebandExample> examples, LabelGranularity g,
                                std::size_t first_index = 0);

struct EvalConfig {
  std::vector<double> iou_thresholds = default_thresholds();
  std::size_t max_detections = 100;
  /// Area buckets in pixels of the grid below.
  double small_area = 1024.0;
  double large_area = 9216.0;
  std::size_t recall_points = 101;
  std::size_t grid_rows = 512;
  std::size_t grid_cols = 512;

  static std::vector<double> default_thresholds();
  void validate() const;
};

struct ClassReport {
  int class_index = 0;
  std::size_t num_truth = 0;
  std::optional<double> ap;
  std::optional<double> ar;
};

/// Empty optionals mark values with no ground truth behind them.
struct EvalReport {
  std::optional<double> map, ap50, ap75, aps, apm, apl, mar;
  /// AP over classes at each configured IoU threshold, all areas.
  std::vector<std::optional<double>> ap_per_threshold;
  std::vector<ClassReport> per_class;
};

/// Intersection over union in normalized (t, f) units.
double iou(const BoxTarget& a, const BoxTarget& b);

/// Pixel area of a box on the evaluation grid.
double pixel_area(const BoxTarget& box, const EvalConfig& cfg);

EvalReport evaluate(const Detections& preds, const GroundTruth& truth, const EvalConfig& cfg = {});

struct SnrBins {
  double min_db = 0.0;
  double max_db = 30.0;
  std::size_t count = 15;

  double width() const { return (max_db - min_db) / static_cast<double>(count); }
};

struct SnrBin {
  double low_db = 0.0;
  double high_db = 0.0;
  std::size_t num_truth = 0;
  std::optional<double> mar;
};

/// Recall averaged over IoU thresholds and over the classes present in each
/// bin, using the all-area matching of evaluate(). Bins are [low, high) except
/// the last, which includes max_db; truth outside [min_db, max_db] is skipped.
std::vector<SnrBin> mar_vs_snr(const Detections& preds, const GroundTruth& truth, const EvalConfig& cfg = {},
                               const SnrBins& bins = {});

/// Line-delimited `example_index t_c f_c d B class score` records.
/// Blank lines and lines starting with '#' are skipped.
std::vector<PredBox> parse_predictions(std::istream& in);

std::string report_json(const EvalReport& report, std::span<const SnrBin> snr_bins = {});

}  // namespace wbsig::metrics
