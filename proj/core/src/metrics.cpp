#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "wbsig/error.hpp"
#include "wbsig/metrics.hpp"

namespace wbsig::metrics {

GroundTruth truth_from_examples(std::span<const WidebandExample> examples, LabelGranularity g,
                                std::size_t first_index) {
  GroundTruth truth{g, {}};
  for (std::size_t i = 0; i < examples.size(); ++i) {
    for (const auto& a : examples[i].annotations) {
      truth.boxes.push_back({first_index + i, targets::to_box(a, g), a.snr_db});
    }
  }
  return truth;
}

std::vector<double> EvalConfig::default_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(static_cast<double>(50 + 5 * i) / 100.0);
  return t;
}

void EvalConfig::validate() const {
  detail::require(!iou_thresholds.empty(), "EvalConfig: no IoU thresholds");
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    detail::require(iou_thresholds[i] > 0.0 && iou_thresholds[i] <= 1.0, "EvalConfig: thresholds must be in (0, 1]");
    detail::require(i == 0 || iou_thresholds[i] > iou_thresholds[i - 1], "EvalConfig: thresholds must ascend");
  }
  detail::require(max_detections > 0, "EvalConfig: max_detections must be positive");
  detail::require(recall_points >= 2, "EvalConfig: need at least two recall points");
  detail::require(small_area <= large_area, "EvalConfig: small_area must not exceed large_area");
  detail::require(grid_rows > 0 && grid_cols > 0, "EvalConfig: empty grid");
}

double iou(const BoxTarget& a, const BoxTarget& b) {
  const double dt = std::min(a.t1(), b.t1()) - std::max(a.t0(), b.t0());
  const double df = std::min(a.f1(), b.f1()) - std::max(a.f0(), b.f0());
  if (dt <= 0.0 || df <= 0.0) return 0.0;
  const double inter = dt * df;
  const double uni = a.d * a.b + b.d * b.b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double pixel_area(const BoxTarget& box, const EvalConfig& cfg) {
  return box.d * static_cast<double>(cfg.grid_cols) * box.b * static_cast<double>(cfg.grid_rows);
}

namespace {

struct AreaRange {
  double lo;
  double hi;
  bool contains(double a) const { return a >= lo && a < hi; }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(const Detections& preds, const GroundTruth& truth, const EvalConfig& cfg) {
  cfg.validate();
  detail::require(preds.granularity == truth.granularity, "evaluate: prediction and truth granularities differ");
  const auto labels = static_cast<int>(targets::num_labels(truth.granularity));
  const auto check_box = [&](const BoxTarget& b, const char* what) {
    detail::require(b.class_index >= 0 && b.class_index < labels, std::string("evaluate: ") + what +
                                                                      " class index out of range");
    detail::require(std::isfinite(b.t_c) && std::isfinite(b.f_c) && b.d > 0.0 && b.b > 0.0,
                    std::string("evaluate: ") + what + " box geometry invalid");
  };
  for (const auto& p : preds.boxes) {
    check_box(p.box, "prediction");
    detail::require(p.score >= 0.0 && p.score <= 1.0, "evaluate: prediction score must be in [0, 1]");
  }
  for (const auto& t : truth.boxes) check_box(t.box, "truth");
}

// One scored detection after per-image matching, with per-threshold outcome.
struct DetOutcome {
  double score;
  std::vector<char> matched;  // per threshold
  std::vector<char> ignored;  // per threshold
};

struct ClassMatches {
  std::vector<DetOutcome> dets;         // image order, score-descending within an image
  std::size_t num_truth = 0;            // truth in the area range
  std::vector<std::vector<char>> gt_hit;  // [threshold][truth index into GroundTruth::boxes]
};

// COCO per-image matching for every class, restricted to one area range.
std::vector<ClassMatches> match(const Detections& preds, const GroundTruth& truth, const EvalConfig& cfg,
                                AreaRange area) {
  const std::size_t labels = targets::num_labels(truth.granularity);
  const std::size_t T = cfg.iou_thresholds.size();

  // (class, example) -> indices, ordered so reduction is deterministic.
  std::map<std::pair<int, std::size_t>, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < truth.boxes.size(); ++i) {
    groups[{truth.boxes[i].box.class_index, truth.boxes[i].example_index}].first.push_back(i);
  }
  for (std::size_t i = 0; i < preds.boxes.size(); ++i) {
    groups[{preds.boxes[i].box.class_index, preds.boxes[i].example_index}].second.push_back(i);
  }

  std::vector<ClassMatches> out(labels);
  for (auto& cm : out) cm.gt_hit.assign(T, std::vector<char>(truth.boxes.size(), 0));

  for (auto& [key, members] : groups) {
    ClassMatches& cm = out[static_cast<std::size_t>(key.first)];
    auto& gts = members.first;
    auto& dts = members.second;

    const auto outside = [&](std::size_t g) { return !area.contains(pixel_area(truth.boxes[g].box, cfg)); };
    std::stable_partition(gts.begin(), gts.end(), [&](std::size_t g) { return !outside(g); });
    std::vector<char> gt_ignore(gts.size());
    for (std::size_t g = 0; g < gts.size(); ++g) {
      gt_ignore[g] = outside(gts[g]);
      if (!gt_ignore[g]) ++cm.num_truth;
    }
    std::stable_sort(dts.begin(), dts.end(),
                     [&](std::size_t a, std::size_t b) { return preds.boxes[a].score > preds.boxes[b].score; });
    if (dts.size() > cfg.max_detections) dts.resize(cfg.max_detections);

    std::vector<double> ious(dts.size() * gts.size());
    for (std::size_t d = 0; d < dts.size(); ++d) {
      for (std::size_t g = 0; g < gts.size(); ++g) ious[d * gts.size() + g] = iou(preds.boxes[dts[d]].box, truth.boxes[gts[g]].box);
    }

    const std::size_t first = cm.dets.size();
    for (std::size_t d : dts) cm.dets.push_back({preds.boxes[d].score, std::vector<char>(T, 0), std::vector<char>(T, 0)});

    for (std::size_t t = 0; t < T; ++t) {
      std::vector<char> gt_used(gts.size(), 0);
      for (std::size_t d = 0; d < dts.size(); ++d) {
        double best = std::min(cfg.iou_thresholds[t], 1.0 - 1e-10);
        std::ptrdiff_t m = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
          if (gt_used[g]) continue;
          if (m >= 0 && !gt_ignore[static_cast<std::size_t>(m)] && gt_ignore[g]) break;
          const double v = ious[d * gts.size() + g];
          if (v < best) continue;
          best = v;
          m = static_cast<std::ptrdiff_t>(g);
        }
        DetOutcome& o = cm.dets[first + d];
        if (m < 0) {
          o.ignored[t] = !area.contains(pixel_area(preds.boxes[dts[d]].box, cfg));
          continue;
        }
        const auto mi = static_cast<std::size_t>(m);
        gt_used[mi] = 1;
        o.matched[t] = 1;
        o.ignored[t] = gt_ignore[mi];
        if (!gt_ignore[mi]) cm.gt_hit[t][gts[mi]] = 1;
      }
    }
  }
  return out;
}

struct Accumulated {
  // [threshold][class]; nullopt where the class has no truth in range.
  std::vector<std::vector<std::optional<double>>> precision;
  std::vector<std::vector<std::optional<double>>> recall;
};

Accumulated accumulate(const std::vector<ClassMatches>& matches, const EvalConfig& cfg) {
  const std::size_t T = cfg.iou_thresholds.size(), K = matches.size(), R = cfg.recall_points;
  Accumulated acc;
  acc.precision.assign(T, std::vector<std::optional<double>>(K));
  acc.recall.assign(T, std::vector<std::optional<double>>(K));

  for (std::size_t k = 0; k < K; ++k) {
    const ClassMatches& cm = matches[k];
    if (cm.num_truth == 0) continue;
    std::vector<std::size_t> order(cm.dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cm.dets[a].score > cm.dets[b].score; });
    const auto npig = static_cast<double>(cm.num_truth);

    for (std::size_t t = 0; t < T; ++t) {
      std::vector<double> rc, pr;
      double tp = 0.0, fp = 0.0;
      for (std::size_t i : order) {
        const DetOutcome& o = cm.dets[i];
        if (o.ignored[t]) continue;
        (o.matched[t] ? tp : fp) += 1.0;
        rc.push_back(tp / npig);
        pr.push_back(tp / (tp + fp));
      }
      acc.recall[t][k] = rc.empty() ? 0.0 : rc.back();
      for (std::size_t i = pr.size(); i-- > 1;) pr[i - 1] = std::max(pr[i - 1], pr[i]);
      double sum = 0.0;
      for (std::size_t r = 0; r < R; ++r) {
        const double level = static_cast<double>(r) / static_cast<double>(R - 1);
        const auto it = std::lower_bound(rc.begin(), rc.end(), level);
        if (it != rc.end()) sum += pr[static_cast<std::size_t>(it - rc.begin())];
      }
      acc.precision[t][k] = sum / static_cast<double>(R);
    }
  }
  return acc;
}

std::optional<double> mean_defined(const std::vector<std::vector<std::optional<double>>>& table,
                                   std::optional<std::size_t> only_threshold = std::nullopt) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < table.size(); ++t) {
    if (only_threshold && t != *only_threshold) continue;
    for (const auto& v : table[t]) {
      if (v) sum += *v, ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<std::size_t> threshold_index(const EvalConfig& cfg, double value) {
  for (std::size_t i = 0; i < cfg.iou_thresholds.size(); ++i) {
    if (std::abs(cfg.iou_thresholds[i] - value) < 1e-9) return i;
  }
  return std::nullopt;
}

}  // namespace

EvalReport evaluate(const Detections& preds, const GroundTruth& truth, const EvalConfig& cfg) {
  check_inputs(preds, truth, cfg);
  EvalReport report;

  const auto all = accumulate(match(preds, truth, cfg, {0.0, kInf}), cfg);
  report.map = mean_defined(all.precision);
  report.mar = mean_defined(all.recall);
  for (std::size_t t = 0; t < cfg.iou_thresholds.size(); ++t) report.ap_per_threshold.push_back(mean_defined(all.precision, t));
  if (const auto i = threshold_index(cfg, 0.5)) report.ap50 = mean_defined(all.precision, *i);
  if (const auto i = threshold_index(cfg, 0.75)) report.ap75 = mean_defined(all.precision, *i);

  report.aps = mean_defined(accumulate(match(preds, truth, cfg, {0.0, cfg.small_area}), cfg).precision);
  report.apm = mean_defined(accumulate(match(preds, truth, cfg, {cfg.small_area, cfg.large_area}), cfg).precision);
  report.apl = mean_defined(accumulate(match(preds, truth, cfg, {cfg.large_area, kInf}), cfg).precision);

  const std::size_t K = targets::num_labels(truth.granularity);
  std::vector<std::size_t> counts(K, 0);
  for (const auto& b : truth.boxes) ++counts[static_cast<std::size_t>(b.box.class_index)];
  for (std::size_t k = 0; k < K; ++k) {
    if (counts[k] == 0) continue;
    ClassReport row{static_cast<int>(k), counts[k], {}, {}};
    double ap = 0.0, ar = 0.0;
    for (std::size_t t = 0; t < cfg.iou_thresholds.size(); ++t) {
      ap += *all.precision[t][k];
      ar += *all.recall[t][k];
    }
    const auto T = static_cast<double>(cfg.iou_thresholds.size());
    row.ap = ap / T;
    row.ar = ar / T;
    report.per_class.push_back(row);
  }
  return report;
}

std::vector<SnrBin> mar_vs_snr(const Detections& preds, const GroundTruth& truth, const EvalConfig& cfg,
                               const SnrBins& bins) {
  check_inputs(preds, truth, cfg);
  detail::require(bins.count > 0 && bins.max_db > bins.min_db, "mar_vs_snr: invalid bins");
  for (const auto& b : truth.boxes) detail::require(b.snr_db.has_value(), "mar_vs_snr: truth box without snr_db");

  const auto matches = match(preds, truth, cfg, {0.0, kInf});
  const std::size_t T = cfg.iou_thresholds.size();
  const std::size_t K = matches.size();

  // Per bin and class: truth count and hits summed over thresholds.
  std::vector<std::vector<std::size_t>> count(bins.count, std::vector<std::size_t>(K, 0));
  std::vector<std::vector<std::size_t>> hits(bins.count, std::vector<std::size_t>(K, 0));
  std::vector<SnrBin> out(bins.count);
  for (std::size_t i = 0; i < bins.count; ++i) {
    out[i].low_db = bins.min_db + bins.width() * static_cast<double>(i);
    out[i].high_db = i + 1 == bins.count ? bins.max_db : bins.min_db + bins.width() * static_cast<double>(i + 1);
  }
  for (std::size_t g = 0; g < truth.boxes.size(); ++g) {
    const double snr = *truth.boxes[g].snr_db;
    if (!(snr >= bins.min_db && snr <= bins.max_db)) continue;
    const auto bin = std::min(bins.count - 1, static_cast<std::size_t>((snr - bins.min_db) / bins.width()));
    const auto k = static_cast<std::size_t>(truth.boxes[g].box.class_index);
    ++count[bin][k];
    ++out[bin].num_truth;
    for (std::size_t t = 0; t < T; ++t) hits[bin][k] += matches[k].gt_hit[t][g] ? 1 : 0;
  }
  for (std::size_t i = 0; i < bins.count; ++i) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < K; ++k) {
      if (count[i][k] == 0) continue;
      sum += static_cast<double>(hits[i][k]) / static_cast<double>(count[i][k] * T);
      ++n;
    }
    if (n > 0) out[i].mar = sum / static_cast<double>(n);
  }
  return out;
}

std::vector<PredBox> parse_predictions(std::istream& in) {
  std::vector<PredBox> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    PredBox p;
    if (!(ls >> p.example_index >> p.box.t_c >> p.box.f_c >> p.box.d >> p.box.b >> p.box.class_index >> p.score)) {
      throw ParameterError("parse_predictions: malformed line " + std::to_string(line_no));
    }
    std::string rest;
    if (ls >> rest) throw ParameterError("parse_predictions: trailing fields on line " + std::to_string(line_no));
    p.box.score = p.score;
    out.push_back(p);
  }
  return out;
}

std::string report_json(const EvalReport& report, std::span<const SnrBin> snr_bins) {
  using nlohmann::json;
  const auto value = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["mAP"] = value(report.map);
  j["AP50"] = value(report.ap50);
  j["AP75"] = value(report.ap75);
  j["APS"] = value(report.aps);
  j["APM"] = value(report.apm);
  j["APL"] = value(report.apl);
  j["mAR"] = value(report.mar);
  json per_class = json::array();
  for (const auto& row : report.per_class) {
    per_class.push_back({{"class", row.class_index}, {"num_truth", row.num_truth}, {"AP", value(row.ap)}, {"AR", value(row.ar)}});
  }
  j["per_class"] = per_class;
  if (!snr_bins.empty()) {
    json curve = json::array();
    for (const auto& b : snr_bins) {
      curve.push_back({{"low_db", b.low_db}, {"high_db", b.high_db}, {"num_truth", b.num_truth}, {"mAR", value(b.mar)}});
    }
    j["mar_vs_snr"] = curve;
  }
  return j.dump(2);
}

}  // namespace wbsig::metrics
