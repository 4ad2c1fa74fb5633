#include "support.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "wbsig/dsp.hpp"
#include "wbsig/impairments.hpp"
#include "wbsig/modem.hpp"
#include "wbsig/targets.hpp"

namespace wbsig::testing {

Samples tone(std::size_t n, double f, double amplitude, double phase) {
  Samples x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::polar(amplitude, phase + 2.0 * std::numbers::pi * std::remainder(f * static_cast<double>(i), 1.0));
  }
  return x;
}

double peak_frequency(std::span<const Complex> x) {
  Samples spec(x.begin(), x.end());
  dsp::fft(spec);
  std::size_t best = 0;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    if (std::norm(spec[k]) > std::norm(spec[best])) best = k;
  }
  return dsp::bin_frequency(best, spec.size());
}

double band_power_db(std::span<const Complex> x, double f_low, double f_high) {
  const double band = dsp::measure_power(x, std::nullopt, dsp::FrequencyBand{f_low, f_high});
  const double total = dsp::mean_power(x);
  return 10.0 * std::log10(std::max(band, 1e-300) / total);
}

WidebandExample tone_example(std::size_t n, std::span<const ToneSource> tones, Rng& rng) {
  WidebandExample x;
  x.iq = dsp::complex_noise(n, 1.0, rng);
  const auto nd = static_cast<double>(n);
  for (const auto& t : tones) {
    const auto begin = static_cast<std::size_t>(std::llround(t.t_start * nd));
    const auto end = static_cast<std::size_t>(std::llround((t.t_start + t.duration) * nd));
    const Samples s = tone(n, t.f, std::sqrt(t.power), rng.uniform(0.0, 2.0 * std::numbers::pi));
    for (std::size_t i = begin; i < end; ++i) x.iq[i] += s[i];
    x.annotations.push_back(make_annotation(SignalClass::BPSK, static_cast<double>(begin) / nd,
                                            static_cast<double>(end - begin) / nd, t.f, t.label_bandwidth,
                                            10.0 * std::log10(t.power / t.label_bandwidth)));
  }
  return x;
}

ToneSource random_tone(Rng& rng) {
  ToneSource t;
  t.f = rng.uniform(-0.35, 0.35);
  t.label_bandwidth = rng.uniform(0.01, 0.04);
  if (rng.bernoulli(0.5)) {
    t.duration = rng.uniform(0.2, 0.8);
    t.t_start = rng.uniform(0.0, 1.0 - t.duration);
  }
  return t;
}

std::optional<Localization> localize(const WidebandExample& x, const SignalAnnotation& a, double margin) {
  const dsp::Spectrogram s = dsp::spectrogram(x.iq);
  const std::size_t R = s.rows(), C = s.cols();
  std::vector<double> power(R * C);
  for (std::size_t i = 0; i < power.size(); ++i) power[i] = std::norm(s.values()[i]);
  std::vector<double> sorted = power;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double threshold = 100.0 * sorted[sorted.size() / 2];

  const auto clamp_index = [](double v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n)));
  };
  const std::size_t c0 = clamp_index(std::floor((a.t_start - margin) * static_cast<double>(C)), C);
  const std::size_t c1 = clamp_index(std::ceil((a.t_stop() + margin) * static_cast<double>(C)), C);
  const std::size_t r0 = clamp_index(std::floor((a.f_low() - margin + 0.5) * static_cast<double>(R)), R);
  const std::size_t r1 = clamp_index(std::ceil((a.f_high() + margin + 0.5) * static_cast<double>(R)), R);
  if (c0 >= c1 || r0 >= r1) return std::nullopt;

  std::size_t best_row = r0;
  double best = -1.0;
  for (std::size_t r = r0; r < r1; ++r) {
    double sum = 0.0;
    for (std::size_t c = c0; c < c1; ++c) sum += power[r * C + c];
    if (sum > best) best = sum, best_row = r;
  }

  // Window mainlobe: the tone spreads over the peak row and its neighbours.
  const std::size_t lo = best_row > 0 ? best_row - 1 : best_row;
  const std::size_t hi = std::min(R - 1, best_row + 1);
  std::optional<std::size_t> first, last;
  double weight = 0.0, moment = 0.0;
  for (std::size_t c = c0; c < c1; ++c) {
    double col_peak = 0.0;
    for (std::size_t r = lo; r <= hi; ++r) col_peak = std::max(col_peak, power[r * C + c]);
    if (col_peak < threshold) continue;
    if (!first) first = c;
    last = c;
    for (std::size_t r = lo; r <= hi; ++r) {
      weight += power[r * C + c];
      moment += power[r * C + c] * static_cast<double>(r);
    }
  }
  if (!first) return std::nullopt;
  Localization out;
  out.t_center = 0.5 * static_cast<double>(*first + *last + 1) / static_cast<double>(C);
  out.f_center = moment / weight / static_cast<double>(R) - 0.5;
  return out;
}

ChainOutcome run_bookkeeping_chain(Rng& rng, double tolerance) {
  const std::array<ToneSource, 1> tones{random_tone(rng)};
  const WidebandExample clean = tone_example(262144, tones, rng);
  const WidebandExample x = impair::impair_example(clean, impair::ImpairmentConfig{}, rng);
  ChainOutcome out;
  for (const auto& a : x.annotations) {
    ++out.checked;
    if (a.f_high() >= 0.5 - 1e-6 || a.f_low() <= -0.5 + 1e-6) {
      ++out.edge_clipped;
      if (a.bandwidth > 0.0 && a.f_high() <= 0.5 + 1e-12 && a.f_low() >= -0.5 - 1e-12) continue;
      ++out.failed;
      if (out.first_failure.empty()) out.first_failure = "edge-clipped annotation outside [-0.5, 0.5]";
      continue;
    }
    const auto loc = localize(x, a);
    const double dt = loc ? std::abs(loc->t_center - (a.t_start + 0.5 * a.duration)) : 1.0;
    const double df = loc ? std::abs(loc->f_center - a.f_center) : 1.0;
    if (dt <= tolerance && df <= tolerance) continue;
    ++out.failed;
    if (out.first_failure.empty()) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "applied=0x%x f=%.4f dt=%.4f df=%.4f", x.meta.applied, a.f_center, dt, df);
      out.first_failure = buf;
    }
  }
  return out;
}

double frequency_shift_image_db(Rng& rng) {
  constexpr std::size_t n = 65536;
  Samples base = dsp::complex_noise(n, 1.0, rng);
  base = dsp::convolve(base, dsp::design_filter(dsp::FilterSpec::lowpass(0.1, 255, 80.0)));
  WidebandExample x;
  x.iq = dsp::frequency_translate(base, 0.35);
  x.meta.noise_psd = 0.0;
  x.annotations.push_back(make_annotation(SignalClass::QPSK, 0.0, 1.0, 0.35, 0.2, 30.0));
  const WidebandExample y = impair::frequency_shift(x, 0.2, rng);
  return band_power_db(y.iq, -0.5, -0.35);
}

std::size_t loopback_symbol_errors(SignalClass c, std::size_t num_symbols, double es_n0_db, Rng& rng) {
  modem::LinearModSpec spec;
  spec.constellation = modem::build_constellation(c);
  spec.samples_per_symbol = 4.0;
  spec.rrc_rolloff = 0.35;
  const std::size_t sps = 4;

  std::vector<std::size_t> symbols(num_symbols);
  for (auto& s : symbols) s = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(spec.constellation.size()) - 1));
  Samples rx = modem::modulate_linear(spec, symbols);

  // Unit per-sample power, so Es = sps and N0 = sps / (Es/N0).
  const double n0 = static_cast<double>(sps) / std::pow(10.0, es_n0_db / 10.0);
  const Samples noise = dsp::complex_noise(rx.size(), n0, rng);
  for (std::size_t i = 0; i < rx.size(); ++i) rx[i] += noise[i];

  const auto pulse = modem::linear_pulse(sps, spec.rrc_rolloff, spec.filter_span);
  const Samples mf = dsp::convolve(rx, pulse, dsp::ConvolveMode::Full);
  const std::size_t delay = pulse.size() - 1;
  std::size_t errors = 0;
  for (std::size_t k = 0; k < num_symbols; ++k) {
    const Complex y = mf[delay + k * sps] / static_cast<double>(sps);
    std::size_t decided = 0;
    for (std::size_t m = 1; m < spec.constellation.size(); ++m) {
      if (std::norm(y - spec.constellation[m]) < std::norm(y - spec.constellation[decided])) decided = m;
    }
    // Compare points, not indices: constellations may repeat a point.
    if (spec.constellation[decided] != spec.constellation[symbols[k]]) ++errors;
  }
  return errors;
}

// --- Metrics reference ----------------------------------------------------------

namespace {

double corner_iou(const targets::BoxTarget& a, const targets::BoxTarget& b) {
  const double ta0 = a.t_c - a.d / 2, ta1 = a.t_c + a.d / 2, fa0 = a.f_c - a.b / 2, fa1 = a.f_c + a.b / 2;
  const double tb0 = b.t_c - b.d / 2, tb1 = b.t_c + b.d / 2, fb0 = b.f_c - b.b / 2, fb1 = b.f_c + b.b / 2;
  const double w = std::max(0.0, std::min(ta1, tb1) - std::max(ta0, tb0));
  const double h = std::max(0.0, std::min(fa1, fb1) - std::max(fa0, fb0));
  const double inter = w * h;
  const double uni = (ta1 - ta0) * (fa1 - fa0) + (tb1 - tb0) * (fb1 - fb0) - inter;
  return inter > 0.0 ? inter / uni : 0.0;
}

struct RefResult {
  std::optional<double> ap;
  std::optional<double> recall;
};

RefResult reference_class(const metrics::Detections& preds, const metrics::GroundTruth& truth,
                          const metrics::EvalConfig& cfg, int cls, double thr, double area_lo, double area_hi) {
  const auto in_range = [&](const targets::BoxTarget& b) {
    const double a = metrics::pixel_area(b, cfg);
    return a >= area_lo && a < area_hi;
  };
  std::map<std::size_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> images;
  for (std::size_t i = 0; i < truth.boxes.size(); ++i) {
    if (truth.boxes[i].box.class_index == cls) images[truth.boxes[i].example_index].first.push_back(i);
  }
  for (std::size_t i = 0; i < preds.boxes.size(); ++i) {
    if (preds.boxes[i].box.class_index == cls) images[preds.boxes[i].example_index].second.push_back(i);
  }

  std::size_t npig = 0;
  struct Scored {
    double score;
    bool tp;
  };
  std::vector<Scored> scored;
  for (auto& [img, group] : images) {
    auto gts = group.first;
    auto dts = group.second;
    std::stable_partition(gts.begin(), gts.end(), [&](std::size_t g) { return in_range(truth.boxes[g].box); });
    for (std::size_t g : gts) npig += in_range(truth.boxes[g].box) ? 1 : 0;
    std::stable_sort(dts.begin(), dts.end(),
                     [&](std::size_t a, std::size_t b) { return preds.boxes[a].score > preds.boxes[b].score; });
    if (dts.size() > cfg.max_detections) dts.resize(cfg.max_detections);

    std::vector<bool> used(gts.size(), false);
    for (std::size_t d : dts) {
      const auto& db = preds.boxes[d].box;
      // Best unmatched in-range truth first; out-of-range truth only if none qualifies.
      std::optional<std::size_t> pick;
      for (int pass = 0; pass < 2 && !pick; ++pass) {
        double best = std::min(thr, 1.0 - 1e-10);
        for (std::size_t g = 0; g < gts.size(); ++g) {
          if (used[g] || in_range(truth.boxes[gts[g]].box) != (pass == 0)) continue;
          const double v = corner_iou(db, truth.boxes[gts[g]].box);
          if (v >= best) best = v, pick = g;
        }
      }
      if (pick) {
        used[*pick] = true;
        if (in_range(truth.boxes[gts[*pick]].box)) scored.push_back({preds.boxes[d].score, true});
      } else if (in_range(db)) {
        scored.push_back({preds.boxes[d].score, false});
      }
    }
  }
  if (npig == 0) return {};

  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
  std::vector<double> precision, recall;
  double tp = 0.0;
  for (std::size_t k = 0; k < scored.size(); ++k) {
    tp += scored[k].tp ? 1.0 : 0.0;
    precision.push_back(tp / static_cast<double>(k + 1));
    recall.push_back(tp / static_cast<double>(npig));
  }
  double sum = 0.0;
  for (std::size_t r = 0; r < cfg.recall_points; ++r) {
    const double level = static_cast<double>(r) / static_cast<double>(cfg.recall_points - 1);
    double best = 0.0;
    for (std::size_t k = 0; k < precision.size(); ++k) {
      if (recall[k] >= level) best = std::max(best, precision[k]);
    }
    sum += best;
  }
  return {sum / static_cast<double>(cfg.recall_points), recall.empty() ? 0.0 : recall.back()};
}

std::optional<double> average(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) sum += *v, ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

metrics::EvalReport reference_evaluate(const metrics::Detections& preds, const metrics::GroundTruth& truth,
                                       const metrics::EvalConfig& cfg) {
  const auto K = static_cast<int>(targets::num_labels(truth.granularity));
  const double inf = std::numeric_limits<double>::infinity();
  const auto sweep = [&](double lo, double hi, std::optional<double> only) {
    std::vector<std::optional<double>> ap, rc;
    for (double thr : cfg.iou_thresholds) {
      if (only && std::abs(thr - *only) > 1e-9) continue;
      for (int k = 0; k < K; ++k) {
        const RefResult r = reference_class(preds, truth, cfg, k, thr, lo, hi);
        ap.push_back(r.ap);
        rc.push_back(r.recall);
      }
    }
    return std::make_pair(average(ap), average(rc));
  };

  metrics::EvalReport rep;
  std::tie(rep.map, rep.mar) = sweep(0.0, inf, std::nullopt);
  rep.ap50 = sweep(0.0, inf, 0.5).first;
  rep.ap75 = sweep(0.0, inf, 0.75).first;
  rep.aps = sweep(0.0, cfg.small_area, std::nullopt).first;
  rep.apm = sweep(cfg.small_area, cfg.large_area, std::nullopt).first;
  rep.apl = sweep(cfg.large_area, inf, std::nullopt).first;
  for (double thr : cfg.iou_thresholds) rep.ap_per_threshold.push_back(sweep(0.0, inf, thr).first);
  return rep;
}

MetricsInstance random_metrics_instance(Rng& rng, std::size_t max_truth, std::size_t max_preds) {
  MetricsInstance inst;
  inst.preds.granularity = inst.truth.granularity = targets::LabelGranularity::Family6;
  const auto num_examples = static_cast<std::size_t>(rng.uniform_int(1, 3));
  const auto random_box = [&](int cls) {
    targets::BoxTarget b;
    b.d = rng.uniform(0.02, 0.4);
    b.b = rng.uniform(0.02, 0.4);
    b.t_c = rng.uniform(b.d / 2, 1.0 - b.d / 2);
    b.f_c = rng.uniform(-0.5 + b.b / 2, 0.5 - b.b / 2);
    b.class_index = cls;
    return b;
  };
  const auto nt = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(max_truth)));
  for (std::size_t i = 0; i < nt; ++i) {
    const auto ex = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(num_examples) - 1));
    inst.truth.boxes.push_back({ex, random_box(static_cast<int>(rng.uniform_int(0, 2))), rng.uniform(0.0, 30.0)});
  }
  const auto np = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(max_preds)));
  for (std::size_t i = 0; i < np; ++i) {
    metrics::PredBox p;
    if (!inst.truth.boxes.empty() && rng.bernoulli(0.7)) {
      // Perturb a truth box so matches occur at a spread of IoUs.
      const auto& t = inst.truth.boxes[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(inst.truth.boxes.size()) - 1))];
      p.example_index = t.example_index;
      p.box = t.box;
      p.box.t_c += rng.uniform(-0.3, 0.3) * t.box.d;
      p.box.f_c += rng.uniform(-0.3, 0.3) * t.box.b;
      p.box.d *= rng.uniform(0.7, 1.3);
      p.box.b *= rng.uniform(0.7, 1.3);
      if (rng.bernoulli(0.2)) p.box.class_index = static_cast<int>(rng.uniform_int(0, 2));
    } else {
      p.example_index = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(num_examples) - 1));
      p.box = random_box(static_cast<int>(rng.uniform_int(0, 2)));
    }
    p.score = rng.uniform();
    inst.preds.boxes.push_back(p);
  }
  return inst;
}

std::vector<SignalAnnotation> random_separated_boxes(Rng& rng, std::size_t max_boxes) {
  std::vector<SignalAnnotation> boxes;
  std::vector<targets::PixelBox> pixels;
  const auto target = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_boxes)));
  for (int attempt = 0; attempt < 200 && boxes.size() < target; ++attempt) {
    const double d = rng.uniform(0.01, 0.5), b = rng.uniform(0.01, 0.5);
    const double t0 = rng.uniform(0.0, 1.0 - d);
    const double fc = rng.uniform(-0.5 + b / 2 + 1e-6, 0.5 - b / 2 - 1e-6);
    const auto a = make_annotation(SignalClass::QPSK, t0, d, fc, b, 20.0);
    const auto p = targets::box_pixels(targets::to_box(a, targets::LabelGranularity::Detection1));
    const bool clear = std::all_of(pixels.begin(), pixels.end(), [&](const targets::PixelBox& q) {
      return p.col1 < q.col0 || q.col1 < p.col0 || p.row1 < q.row0 || q.row1 < p.row0;
    });
    if (!clear) continue;
    boxes.push_back(a);
    pixels.push_back(p);
  }
  return boxes;
}

double chi_square_critical_01(std::size_t dof) {
  static constexpr double kTable[] = {6.635, 9.210, 11.345, 13.277, 15.086, 16.812, 18.475, 20.090, 21.666, 23.209};
  return dof >= 1 && dof <= 10 ? kTable[dof - 1] : std::numeric_limits<double>::quiet_NaN();
}

double report_distance(const metrics::EvalReport& a, const metrics::EvalReport& b) {
  const double inf = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  const auto cmp = [&](const std::optional<double>& x, const std::optional<double>& y) {
    if (x.has_value() != y.has_value()) {
      worst = inf;
    } else if (x) {
      worst = std::max(worst, std::abs(*x - *y));
    }
  };
  cmp(a.map, b.map);
  cmp(a.ap50, b.ap50);
  cmp(a.ap75, b.ap75);
  cmp(a.aps, b.aps);
  cmp(a.apm, b.apm);
  cmp(a.apl, b.apl);
  cmp(a.mar, b.mar);
  if (a.ap_per_threshold.size() != b.ap_per_threshold.size()) return inf;
  for (std::size_t i = 0; i < a.ap_per_threshold.size(); ++i) cmp(a.ap_per_threshold[i], b.ap_per_threshold[i]);
  return worst;
}

}  // namespace wbsig::testing
