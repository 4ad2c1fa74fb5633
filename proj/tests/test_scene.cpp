#include <doctest.h>

#include <array>
#include <cmath>

#include "support/support.hpp"
#include "wbsig/error.hpp"
#include "wbsig/rng.hpp"
#include "wbsig/scene.hpp"

using namespace wbsig;

namespace {

bool plan_in_range(const SourcePlan& p, const SceneSpec& spec) {
  const bool ofdm = class_to_family(p.signal_class) == ModFamily::OFDM;
  bool ok = p.snr_db >= spec.snr_min_db && p.snr_db <= spec.snr_max_db;
  ok = ok && std::abs(p.f_center) <= spec.f_center_limit;
  ok = ok && p.bandwidth >= (ofdm ? spec.ofdm_bw_min : spec.bw_min);
  ok = ok && p.bandwidth <= (ofdm ? spec.ofdm_bw_max : spec.bw_max);
  ok = ok && p.start >= 0.0 && p.stop <= 1.0 && p.start < p.stop;
  ok = ok && !(p.bursty && p.hopping) && !(ofdm && (p.bursty || p.hopping));
  if (p.bursty) {
    ok = ok && p.bursty->burst_duration >= 0.05 && p.bursty->burst_duration <= 0.2;
    ok = ok && p.bursty->silence_multiplier >= 1.0 && p.bursty->silence_multiplier <= 3.0;
  }
  if (p.hopping) ok = ok && p.hopping->num_channels >= 2 && p.hopping->num_channels <= 16;
  return ok && !p.emissions.empty();
}

}  // namespace

TEST_CASE("plan_scene is a pure function of the seed") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng a(seed), b(seed);
    CHECK(plan_scene(SceneSpec::clean(), a) == plan_scene(SceneSpec::clean(), b));
  }
}

TEST_CASE("a SceneSpec forcing one source yields one plan") {
  SceneSpec spec;
  spec.min_sources = spec.max_sources = 1;
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const auto plans = plan_scene(spec, rng);
    REQUIRE(plans.size() == 1);
    CHECK(plan_in_range(plans[0], spec));
  }
}

TEST_CASE("planned scenes respect ranges and never overlap") {
  Rng rng(5);
  for (const SceneSpec& spec : {SceneSpec::clean(), SceneSpec::impaired()}) {
    for (int i = 0; i < 2000; ++i) {
      const auto plans = plan_scene(spec, rng);
      REQUIRE(!plans.empty());
      REQUIRE(plans.size() <= 6);
      std::vector<SignalAnnotation> anns;
      for (const auto& p : plans) {
        CHECK(plan_in_range(p, spec));
        const auto a = plan_annotations(p);
        anns.insert(anns.end(), a.begin(), a.end());
      }
      REQUIRE(!anns.empty());
      for (std::size_t j = 0; j < anns.size(); ++j) {
        CHECK(annotation_valid(anns[j]));
        for (std::size_t k = j + 1; k < anns.size(); ++k) CHECK_FALSE(annotations_overlap(anns[j], anns[k]));
      }
    }
  }
}

TEST_CASE("scene statistics") {
  const SceneSpec spec = SceneSpec::clean();
  Rng rng(6);
  std::array<int, 7> counts{};
  std::size_t sources = 0, ofdm = 0, non_ofdm = 0, bursty = 0, hopping = 0;
  constexpr int kPlans = 10000;
  for (int i = 0; i < kPlans; ++i) {
    const auto plans = plan_scene(spec, rng);
    ++counts[plans.size()];
    for (const auto& p : plans) {
      ++sources;
      if (class_to_family(p.signal_class) == ModFamily::OFDM) {
        ++ofdm;
      } else {
        ++non_ofdm;
        bursty += p.bursty ? 1 : 0;
        hopping += p.hopping ? 1 : 0;
      }
    }
  }
  double chi2 = 0.0;
  for (std::size_t k = 1; k <= 6; ++k) chi2 += std::pow(counts[k] - kPlans / 6.0, 2) / (kPlans / 6.0);
  CHECK(chi2 < testing::chi_square_critical_01(5));
  CHECK(std::abs(static_cast<double>(ofdm) / static_cast<double>(sources) - 2.0 / 7.0) <= 0.02);
  CHECK(std::abs(static_cast<double>(bursty) / static_cast<double>(non_ofdm) - 0.2) <= 0.02);
  CHECK(std::abs(static_cast<double>(hopping) / static_cast<double>(non_ofdm) - 0.2) <= 0.02);
}

TEST_CASE("render_example") {
  SceneSpec spec;
  spec.num_iq_samples = 65536;

  SUBCASE("zero plans give the unit noise floor and no annotations") {
    Rng rng(7);
    const auto x = render_example({}, spec, rng);
    CHECK(x.annotations.empty());
    CHECK(x.size() == spec.num_iq_samples);
    CHECK(dsp::mean_power(x.iq) == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("bursty plan with three bursts gives three annotations sharing f and B") {
    SourcePlan p;
    p.signal_class = SignalClass::QPSK;
    p.snr_db = 20.0;
    p.f_center = 0.1;
    p.bandwidth = 0.05;
    p.bursty = BurstyParams{0.1, 2.0};
    p.emissions = {{0.05, 0.15, 0.1}, {0.35, 0.45, 0.1}, {0.65, 0.75, 0.1}};
    Rng rng(8);
    const auto x = render_example(std::vector<SourcePlan>{p}, spec, rng);
    REQUIRE(x.annotations.size() == 3);
    for (const auto& a : x.annotations) {
      CHECK(a.f_center == 0.1);
      CHECK(a.bandwidth == 0.05);
      CHECK(a.duration == doctest::Approx(0.1));
      CHECK(measure_es_n0(x, a) == doctest::Approx(20.0).epsilon(0.05));
    }
  }
  SUBCASE("render is deterministic") {
    Rng a(9), b(9);
    const auto pa = plan_scene(spec, a);
    const auto pb = plan_scene(spec, b);
    const auto xa = render_example(pa, spec, a);
    const auto xb = render_example(pb, spec, b);
    CHECK(xa.iq == xb.iq);
    CHECK(xa.annotations == xb.annotations);
  }
}

TEST_CASE("measure_es_n0") {
  Rng rng(10);
  SUBCASE("pure noise reads at or below -20 dB") {
    const auto x = testing::tone_example(262144, {}, rng);
    const auto a = make_annotation(SignalClass::BPSK, 0.0, 1.0, 0.0, 0.8, 0.0);
    CHECK(measure_es_n0(x, a) <= -20.0);
  }
  SUBCASE("planted tone matches its closed-form Es/N0") {
    const std::array<testing::ToneSource, 1> tones{testing::ToneSource{0.1, 0.0, 1.0, 0.02, 10.0}};
    const auto x = testing::tone_example(65536, tones, rng);
    const double expect = 10.0 * std::log10(10.0 / 0.02);
    CHECK(std::abs(measure_es_n0(x, x.annotations[0]) - expect) <= 1.0);
  }
  SUBCASE("doubling the amplitude adds 6 dB") {
    const std::array<testing::ToneSource, 1> lo{testing::ToneSource{-0.2, 0.0, 1.0, 0.02, 10.0}};
    const std::array<testing::ToneSource, 1> hi{testing::ToneSource{-0.2, 0.0, 1.0, 0.02, 40.0}};
    const auto xl = testing::tone_example(65536, lo, rng);
    const auto xh = testing::tone_example(65536, hi, rng);
    const double diff = measure_es_n0(xh, xh.annotations[0]) - measure_es_n0(xl, xl.annotations[0]);
    CHECK(std::abs(diff - 6.02) <= 0.5);
  }
  SUBCASE("a box with no samples is rejected") {
    const auto x = testing::tone_example(4096, {}, rng);
    CHECK_THROWS_AS(measure_es_n0(x, make_annotation(SignalClass::BPSK, 1.0, 1e-9, 0.0, 0.1, 0.0)), ParameterError);
  }
}

TEST_CASE("rendered sources hit their planned Es/N0") {
  const SceneSpec spec = SceneSpec::impaired();
  Rng rng(11);
  int checked = 0;
  while (checked < 20) {
    auto plans = plan_scene(spec, rng);
    std::erase_if(plans, [](const SourcePlan& p) {
      return p.bursty || p.hopping || p.bandwidth < 0.05 || p.stop - p.start < 0.5;
    });
    if (plans.empty()) continue;
    const auto x = render_example(plans, spec, rng);
    for (const auto& a : x.annotations) {
      CAPTURE(class_name(a.signal_class));
      CHECK(std::abs(measure_es_n0(x, a) - a.snr_db) <= 1.0);
      ++checked;
    }
  }
}
