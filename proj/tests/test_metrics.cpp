#include <doctest.h>

#include <cmath>
#include <sstream>

#include "support/support.hpp"
#include "wbsig/error.hpp"
#include "wbsig/metrics.hpp"
#include "wbsig/rng.hpp"

using namespace wbsig;
using namespace wbsig::metrics;
using targets::BoxTarget;
using targets::LabelGranularity;

namespace {

BoxTarget corner_box(double t0, double t1, double f0, double f1, int cls = 0) {
  return BoxTarget{0.5 * (t0 + t1), 0.5 * (f0 + f1), t1 - t0, f1 - f0, cls, std::nullopt};
}

// No two truth boxes of one example intersect, so a box reaching IoU 0.5
// against one truth cannot reach it against another.
bool truth_disjoint(const GroundTruth& g) {
  for (std::size_t i = 0; i < g.boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < g.boxes.size(); ++j) {
      if (g.boxes[i].example_index == g.boxes[j].example_index && iou(g.boxes[i].box, g.boxes[j].box) > 0.0) {
        return false;
      }
    }
  }
  return true;
}

testing::MetricsInstance disjoint_instance(Rng& rng) {
  for (;;) {
    auto inst = testing::random_metrics_instance(rng);
    if (truth_disjoint(inst.truth)) return inst;
  }
}

}  // namespace

TEST_CASE("iou") {
  const auto a = corner_box(0.1, 0.3, -0.2, 0.1);
  CHECK(iou(a, a) == doctest::Approx(1.0));
  CHECK(iou(a, corner_box(0.4, 0.5, -0.2, 0.1)) == 0.0);
  CHECK(iou(corner_box(0, 10, 0, 10), corner_box(5, 15, 0, 10)) == doctest::Approx(1.0 / 3.0));
  CHECK(iou(a, corner_box(0.3, 0.5, -0.2, 0.1)) == 0.0);
}

TEST_CASE("evaluate on hand-built cases") {
  GroundTruth truth{LabelGranularity::Detection1, {}};
  Detections preds{LabelGranularity::Detection1, {}};

  SUBCASE("perfect predictions") {
    Rng rng(1);
    for (std::size_t ex = 0; ex < 5; ++ex) {
      for (const auto& b : targets::to_boxes(testing::random_separated_boxes(rng), LabelGranularity::Detection1)) {
        truth.boxes.push_back({ex, b, 10.0});
        preds.boxes.push_back({ex, b, 1.0});
      }
    }
    const auto r = evaluate(preds, truth);
    CHECK(*r.map == doctest::Approx(1.0));
    CHECK(*r.mar == doctest::Approx(1.0));
    CHECK(*r.ap50 == doctest::Approx(1.0));
    CHECK(*r.ap75 == doctest::Approx(1.0));
  }
  SUBCASE("single match at IoU 0.6 scores on three thresholds of ten") {
    truth.boxes.push_back({0, BoxTarget{0.5, 0.0, 0.625, 0.25, 0, std::nullopt}, 10.0});
    preds.boxes.push_back({0, BoxTarget{0.5, 0.0, 0.375, 0.25, 0, std::nullopt}, 0.9});
    REQUIRE(iou(truth.boxes[0].box, preds.boxes[0].box) == 0.6);
    const auto r = evaluate(preds, truth);
    CHECK(*r.map == doctest::Approx(0.3));
    CHECK(*r.mar == doctest::Approx(0.3));
    CHECK(*r.ap50 == doctest::Approx(1.0));
    CHECK(*r.ap75 == 0.0);
    REQUIRE(r.ap_per_threshold.size() == 10);
    CHECK(*r.ap_per_threshold[2] == doctest::Approx(1.0));
    CHECK(*r.ap_per_threshold[3] == 0.0);
  }
  SUBCASE("empty predictions") {
    truth.boxes.push_back({0, corner_box(0.1, 0.4, 0.0, 0.2), 5.0});
    const auto r = evaluate(preds, truth);
    CHECK(*r.map == 0.0);
    CHECK(*r.mar == 0.0);
  }
  SUBCASE("no truth leaves every value undefined") {
    preds.boxes.push_back({0, corner_box(0.1, 0.4, 0.0, 0.2), 0.5});
    const auto r = evaluate(preds, truth);
    CHECK_FALSE(r.map.has_value());
    CHECK_FALSE(r.mar.has_value());
    CHECK(r.per_class.empty());
  }
  SUBCASE("area buckets follow pixel area") {
    // 16 x 16 pixels is small, 64 x 64 medium, 128 x 128 large.
    const double s = 16.0 / 512, m = 64.0 / 512, l = 128.0 / 512;
    truth.boxes.push_back({0, corner_box(0.0, s, 0.0, s), 1.0});
    truth.boxes.push_back({0, corner_box(0.25, 0.25 + m, 0.0, m), 1.0});
    truth.boxes.push_back({0, corner_box(0.5, 0.5 + l, 0.0, l), 1.0});
    preds.boxes.push_back({0, truth.boxes[1].box, 1.0});
    const auto r = evaluate(preds, truth);
    CHECK(*r.aps == 0.0);
    CHECK(*r.apm == doctest::Approx(1.0));
    CHECK(*r.apl == 0.0);
  }
  SUBCASE("granularity mismatch is rejected") {
    preds.granularity = LabelGranularity::Fine53;
    CHECK_THROWS_AS(evaluate(preds, truth), ParameterError);
  }
}

TEST_CASE("evaluate agrees with the direct-definition reference") {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto inst = testing::random_metrics_instance(rng);
    const auto fast = evaluate(inst.preds, inst.truth);
    const auto ref = testing::reference_evaluate(inst.preds, inst.truth);
    CAPTURE(i);
    CHECK(testing::report_distance(fast, ref) <= 1e-6);
  }
}

TEST_CASE("scaling every score leaves the report unchanged") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    auto inst = testing::random_metrics_instance(rng);
    const auto before = evaluate(inst.preds, inst.truth);
    const double c = rng.uniform(0.01, 1.0);
    for (auto& p : inst.preds.boxes) p.score *= c;
    CHECK(testing::report_distance(before, evaluate(inst.preds, inst.truth)) <= 1e-12);
  }
}

TEST_CASE("a lower-scored duplicate of a matched prediction never raises AP") {
  Rng rng(4);
  int tried = 0;
  while (tried < 200) {
    auto inst = disjoint_instance(rng);
    if (inst.preds.boxes.empty() || inst.truth.boxes.empty()) continue;
    ++tried;
    const auto before = evaluate(inst.preds, inst.truth);
    auto dup = inst.preds.boxes[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(inst.preds.boxes.size()) - 1))];
    dup.score *= rng.uniform(0.0, 1.0);
    inst.preds.boxes.push_back(dup);
    const auto after = evaluate(inst.preds, inst.truth);
    for (std::size_t t = 0; t < before.ap_per_threshold.size(); ++t) {
      if (before.ap_per_threshold[t]) CHECK(*after.ap_per_threshold[t] <= *before.ap_per_threshold[t] + 1e-12);
    }
    if (before.map) CHECK(*after.map <= *before.map + 1e-12);
  }
}

TEST_CASE("AP never increases with the IoU threshold") {
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    const auto inst = disjoint_instance(rng);
    const auto r = evaluate(inst.preds, inst.truth);
    for (std::size_t t = 1; t < r.ap_per_threshold.size(); ++t) {
      if (r.ap_per_threshold[t]) CHECK(*r.ap_per_threshold[t - 1] >= *r.ap_per_threshold[t] - 1e-12);
    }
  }
}

TEST_CASE("mar_vs_snr") {
  GroundTruth truth{LabelGranularity::Detection1, {}};
  Detections preds{LabelGranularity::Detection1, {}};
  const SnrBins bins{0.0, 30.0, 15};

  SUBCASE("perfect detector fills every occupied bin with 1") {
    for (int i = 0; i < 15; ++i) {
      const auto b = corner_box(0.05 * i, 0.05 * i + 0.04, -0.1, 0.1);
      truth.boxes.push_back({0, b, 2.0 * i + 1.0});
      preds.boxes.push_back({0, b, 0.9});
    }
    for (const auto& bin : mar_vs_snr(preds, truth, {}, bins)) {
      REQUIRE(bin.mar.has_value());
      CHECK(*bin.mar == doctest::Approx(1.0));
    }
  }
  SUBCASE("a detector that finds only strong signals") {
    for (int i = 0; i < 15; ++i) {
      const auto b = corner_box(0.05 * i, 0.05 * i + 0.04, -0.1, 0.1);
      const double snr = 2.0 * i + 1.0;
      truth.boxes.push_back({0, b, snr});
      if (snr >= 15.0) preds.boxes.push_back({0, b, 0.9});
    }
    const auto curve = mar_vs_snr(preds, truth, {}, bins);
    for (const auto& bin : curve) CHECK(*bin.mar == (bin.low_db >= 14.0 ? 1.0 : 0.0));
  }
  SUBCASE("one matched truth defines only its own bin") {
    const auto b = corner_box(0.2, 0.4, 0.0, 0.2);
    truth.boxes.push_back({0, b, 10.0});
    preds.boxes.push_back({0, b, 0.5});
    const auto curve = mar_vs_snr(preds, truth, {}, bins);
    REQUIRE(curve.size() == 15);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (i == 5) {
        CHECK(*curve[i].mar == doctest::Approx(1.0));
        CHECK(curve[i].num_truth == 1);
      } else {
        CHECK_FALSE(curve[i].mar.has_value());
      }
    }
  }
  SUBCASE("the top edge belongs to the last bin") {
    truth.boxes.push_back({0, corner_box(0.2, 0.4, 0.0, 0.2), 30.0});
    CHECK(mar_vs_snr(preds, truth, {}, bins).back().num_truth == 1);
  }
  SUBCASE("truth without an SNR is rejected") {
    truth.boxes.push_back({0, corner_box(0.2, 0.4, 0.0, 0.2), std::nullopt});
    CHECK_THROWS_AS(mar_vs_snr(preds, truth, {}, bins), ParameterError);
  }
}

TEST_CASE("EvalConfig validation") {
  EvalConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.iou_thresholds.size() == 10);
  cfg.iou_thresholds = {0.6, 0.5};
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg.iou_thresholds = {0.0};
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("parse_predictions") {
  std::istringstream in("# header\n\n3 0.5 0.1 0.2 0.05 4 0.75\n0 0.25 -0.1 0.1 0.1 0 1\n");
  const auto p = parse_predictions(in);
  REQUIRE(p.size() == 2);
  CHECK(p[0].example_index == 3);
  CHECK(p[0].box.t_c == 0.5);
  CHECK(p[0].box.f_c == 0.1);
  CHECK(p[0].box.d == 0.2);
  CHECK(p[0].box.b == 0.05);
  CHECK(p[0].box.class_index == 4);
  CHECK(p[0].score == 0.75);
  std::istringstream bad("1 0.5 0.1\n");
  CHECK_THROWS_AS(parse_predictions(bad), ParameterError);
  std::istringstream extra("1 0.5 0.1 0.2 0.05 4 0.75 9\n");
  CHECK_THROWS_AS(parse_predictions(extra), ParameterError);
}

TEST_CASE("report_json marks undefined values as null") {
  EvalReport r;
  r.map = 0.5;
  const auto text = report_json(r);
  CHECK(text.find("\"mAP\": 0.5") != std::string::npos);
  CHECK(text.find("\"APS\": null") != std::string::npos);
}
