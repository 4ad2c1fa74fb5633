#include <algorithm>
#include <cmath>
#include <numeric>

#include "wbsig/error.hpp"
#include "wbsig/modem.hpp"
#include "wbsig/rng.hpp"
#include "wbsig/scene.hpp"

namespace wbsig {
namespace {

constexpr double kBandEdge = 0.495;
constexpr double kInitialOccupancy = 0.9;
constexpr double kMaxOccupancy = 0.96;
constexpr int kLayoutAttempts = 100;
constexpr double kMinBurst = 0.05, kMaxBurst = 0.2;

struct Draft {
  SourcePlan plan;
  int channels = 1;
  double bw_lo = 0.0, bw_hi = 0.0;
  double min_span() const { return channels * bw_lo; }
};

double snap(double t, std::size_t n) {
  return std::round(t * static_cast<double>(n)) / static_cast<double>(n);
}

Draft draw_source(const SceneSpec& spec, Rng& rng) {
  Draft d;
  std::array<double, kNumFamilies> weights{};
  for (std::size_t f = 0; f < kNumFamilies; ++f) {
    weights[f] = kAllFamilies[f] == ModFamily::OFDM ? spec.ofdm_weight : 1.0;
  }
  const ModFamily family = kAllFamilies[rng.weighted_index(weights)];
  const auto members = classes_in_family(family);
  auto& p = d.plan;
  p.signal_class = members[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(members.size()) - 1))];
  p.snr_db = rng.uniform(spec.snr_min_db, spec.snr_max_db);

  const bool ofdm = family == ModFamily::OFDM;
  if (!ofdm) {
    // Bursty and hopping are exclusive behaviours sharing one draw.
    const double u = rng.uniform();
    if (u < spec.p_bursty) {
      p.bursty = BurstyParams{rng.uniform(kMinBurst, kMaxBurst), rng.uniform(1.0, 3.0)};
    } else if (u < spec.p_bursty + spec.p_hopping) {
      p.hopping = HoppingParams{static_cast<int>(rng.uniform_int(2, 16))};
    }
  }

  p.start = 0.0;
  p.stop = 1.0;
  if (rng.bernoulli(spec.p_partial_extent)) {
    if (rng.bernoulli(0.5)) {
      p.stop = rng.uniform(0.05, 0.95);
    } else {
      p.start = rng.uniform(0.0, 0.95);
    }
  }

  d.channels = p.hopping ? p.hopping->num_channels : 1;
  d.bw_lo = ofdm ? spec.ofdm_bw_min : spec.bw_min;
  d.bw_hi = ofdm ? spec.ofdm_bw_max : spec.bw_max;
  return d;
}

// Draws bandwidths in order, reserving room for every later source's
// minimum span so the total stays within `occupancy`.
bool draw_bandwidths(std::vector<Draft>& drafts, double occupancy, Rng& rng) {
  double used = 0.0;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    double reserved = 0.0;
    for (std::size_t j = i + 1; j < drafts.size(); ++j) reserved += drafts[j].min_span();
    auto& d = drafts[i];
    const double cap = std::min(d.bw_hi, (occupancy - used - reserved) / d.channels);
    if (cap < d.bw_lo) return false;
    d.plan.bandwidth = rng.uniform(d.bw_lo, cap);
    used += d.plan.bandwidth * d.channels;
  }
  return true;
}

// Random order with Dirichlet-distributed gaps across the band. Succeeds when
// every centre lands within the allowed range.
bool lay_out(std::vector<Draft>& drafts, double f_limit, Rng& rng) {
  const std::size_t n = drafts.size();
  double total = 0.0;
  for (const auto& d : drafts) total += d.plan.footprint();
  const double slack = 2.0 * kBandEdge - total;
  if (slack < 0.0) return false;

  std::vector<std::size_t> order(n);
  std::vector<double> cuts(n), centers(n);
  for (int attempt = 0; attempt < kLayoutAttempts; ++attempt) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    }
    for (auto& c : cuts) c = rng.uniform(0.0, slack);
    std::sort(cuts.begin(), cuts.end());

    double x = -kBandEdge, prev_cut = 0.0;
    bool ok = true;
    for (std::size_t k = 0; k < n; ++k) {
      x += cuts[k] - prev_cut;
      prev_cut = cuts[k];
      const double span = drafts[order[k]].plan.footprint();
      centers[order[k]] = x + 0.5 * span;
      x += span;
      if (std::abs(centers[order[k]]) > f_limit) ok = false;
    }
    if (ok) {
      for (std::size_t i = 0; i < n; ++i) drafts[i].plan.f_center = centers[i];
      return true;
    }
  }
  return false;
}

void resolve_emissions(SourcePlan& p, std::size_t num_samples, Rng& rng) {
  const double min_len = 1.0 / 512.0;
  p.emissions.clear();
  if (p.bursty) {
    const double burst = p.bursty->burst_duration;
    const double silence = p.bursty->silence_multiplier * burst;
    double t = p.start + rng.uniform(0.0, silence);
    while (t < p.stop) {
      const double end = std::min(t + burst, p.stop);
      if (end - t >= min_len) p.emissions.push_back({t, end, p.f_center});
      t = end + silence;
    }
    if (p.emissions.empty()) {
      p.emissions.push_back({p.start, std::min(p.start + burst, p.stop), p.f_center});
    }
  } else if (p.hopping) {
    const int channels = p.hopping->num_channels;
    int prev = -1;
    double t = p.start;
    while (t < p.stop) {
      const double end = std::min(t + rng.uniform(0.05, 0.2), p.stop);
      int ch;
      if (prev < 0) {
        ch = static_cast<int>(rng.uniform_int(0, channels - 1));
      } else {
        // Uniform over the other channels.
        ch = static_cast<int>(rng.uniform_int(0, channels - 2));
        if (ch >= prev) ++ch;
      }
      if (end - t >= min_len || p.emissions.empty()) {
        const double fc = p.f_center + (ch - 0.5 * (channels - 1)) * p.bandwidth;
        p.emissions.push_back({t, end, fc});
        prev = ch;
      }
      t = end;
    }
  } else {
    p.emissions.push_back({p.start, p.stop, p.f_center});
  }

  for (auto& e : p.emissions) {
    e.t_start = snap(e.t_start, num_samples);
    e.t_stop = snap(e.t_stop, num_samples);
  }
  std::erase_if(p.emissions, [](const Emission& e) { return e.t_stop <= e.t_start; });
  if (p.emissions.empty()) {
    const double t0 = snap(p.start, num_samples);
    p.emissions.push_back({t0, t0 + 1.0 / static_cast<double>(num_samples), p.f_center});
  }
}

}  // namespace

double SourcePlan::footprint() const {
  return hopping ? bandwidth * hopping->num_channels : bandwidth;
}

void SceneSpec::validate() const {
  detail::require(num_iq_samples > 0 && num_iq_samples % 512 == 0,
                  "SceneSpec: num_iq_samples must be a positive multiple of 512");
  detail::require(min_sources >= 1 && min_sources <= max_sources, "SceneSpec: invalid source count range");
  detail::require(snr_min_db <= snr_max_db, "SceneSpec: invalid SNR range");
  detail::require(ofdm_weight >= 0.0, "SceneSpec: negative OFDM weight");
  detail::require(p_bursty >= 0.0 && p_hopping >= 0.0 && p_bursty + p_hopping <= 1.0,
                  "SceneSpec: bursty/hopping probabilities must sum to at most 1");
  detail::require(p_partial_extent >= 0.0 && p_partial_extent <= 1.0, "SceneSpec: invalid extent probability");
  detail::require(f_center_limit > 0.0 && f_center_limit < 0.5, "SceneSpec: invalid f_center limit");
  detail::require(bw_min > 0.0 && bw_min <= bw_max && ofdm_bw_min > 0.0 && ofdm_bw_min <= ofdm_bw_max,
                  "SceneSpec: invalid bandwidth range");
  detail::require(ofdm_bw_max < 2.0 * kBandEdge && 16 * bw_min < kMaxOccupancy,
                  "SceneSpec: bandwidth range cannot fit the band");
}

std::vector<SourcePlan> plan_scene(const SceneSpec& spec, Rng& rng) {
  spec.validate();
  const auto count = rng.uniform_int(spec.min_sources, spec.max_sources);
  std::vector<Draft> drafts;
  for (std::int64_t i = 0; i < count; ++i) drafts.push_back(draw_source(spec, rng));

  double occupancy = kInitialOccupancy;
  while (true) {
    double min_total = 0.0;
    for (const auto& d : drafts) min_total += d.min_span();
    if (min_total > kMaxOccupancy) {
      drafts.pop_back();
      continue;
    }
    occupancy = std::max(occupancy, min_total);
    if (draw_bandwidths(drafts, occupancy, rng) && lay_out(drafts, spec.f_center_limit, rng)) break;
    // Tighter packing leaves more slack for the layout; once that no longer
    // helps, give up on the last source.
    if (occupancy * 0.85 >= min_total) {
      occupancy *= 0.85;
    } else if (drafts.size() > 1) {
      drafts.pop_back();
      occupancy = kInitialOccupancy;
    } else {
      occupancy = min_total;
    }
  }

  std::vector<SourcePlan> plans;
  plans.reserve(drafts.size());
  for (auto& d : drafts) {
    resolve_emissions(d.plan, spec.num_iq_samples, rng);
    plans.push_back(std::move(d.plan));
  }
  return plans;
}

std::vector<SignalAnnotation> plan_annotations(const SourcePlan& plan) {
  std::vector<SignalAnnotation> out;
  out.reserve(plan.emissions.size());
  for (const auto& e : plan.emissions) {
    out.push_back(make_annotation(plan.signal_class, e.t_start, e.t_stop - e.t_start, e.f_center,
                                  plan.bandwidth, plan.snr_db));
  }
  return out;
}

WidebandExample render_example(std::span<const SourcePlan> plans, const SceneSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t n = spec.num_iq_samples;
  WidebandExample ex;
  ex.iq = dsp::complex_noise(n, 1.0, rng);
  ex.meta.noise_psd = 1.0;

  for (const auto& plan : plans) {
    for (const auto& e : plan.emissions) {
      const auto begin = static_cast<std::size_t>(std::llround(e.t_start * static_cast<double>(n)));
      const auto end = std::min(n, static_cast<std::size_t>(std::llround(e.t_stop * static_cast<double>(n))));
      if (end <= begin) continue;
      auto wf = modem::synthesize_at_bandwidth(plan.signal_class, plan.bandwidth, end - begin, rng);
      const double power = dsp::mean_power(wf.samples);
      if (!(power > 0.0)) continue;
      const double target = std::pow(10.0, plan.snr_db / 10.0) * plan.bandwidth * ex.meta.noise_psd;
      const double gain = std::sqrt(target / power);
      const Samples moved = dsp::frequency_translate(wf.samples, e.f_center);
      for (std::size_t i = 0; i < moved.size(); ++i) ex.iq[begin + i] += gain * moved[i];
    }
    auto anns = plan_annotations(plan);
    ex.annotations.insert(ex.annotations.end(), anns.begin(), anns.end());
  }
  return ex;
}

double measure_es_n0(const WidebandExample& example, const SignalAnnotation& a) {
  const double n = static_cast<double>(example.size());
  const auto begin = static_cast<std::size_t>(std::llround(std::max(0.0, a.t_start) * n));
  const auto end = std::min(example.size(), static_cast<std::size_t>(std::llround(a.t_stop() * n)));
  detail::require(end > begin, "measure_es_n0: annotation has no samples");
  const auto m = dsp::measure_band(example.iq, {begin, end}, {a.f_low(), a.f_high()});
  const double noise = example.meta.noise_psd * static_cast<double>(m.bins) / static_cast<double>(m.length);
  const double signal = m.power - noise;
  if (!(signal > 0.0)) return kEsN0FloorDb;
  return std::max(kEsN0FloorDb, 10.0 * std::log10(signal / noise));
}

// --- Annotation helpers ----------------------------------------------------

SignalAnnotation make_annotation(SignalClass c, double t_start, double duration, double f_center, double bandwidth,
                                 double snr_db) {
  return {c, class_to_family(c), t_start, duration, f_center, bandwidth, snr_db};
}

bool annotation_valid(const SignalAnnotation& a, double tol) {
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(a.t_start) || !finite(a.duration) || !finite(a.f_center) || !finite(a.bandwidth) ||
      !finite(a.snr_db)) {
    return false;
  }
  return a.duration > 0.0 && a.bandwidth > 0.0 && a.t_start >= -tol && a.t_stop() <= 1.0 + tol &&
         a.f_low() >= -0.5 - tol && a.f_high() <= 0.5 + tol && a.family == class_to_family(a.signal_class);
}

bool annotations_overlap(const SignalAnnotation& a, const SignalAnnotation& b) {
  const double dt = std::min(a.t_stop(), b.t_stop()) - std::max(a.t_start, b.t_start);
  const double df = std::min(a.f_high(), b.f_high()) - std::max(a.f_low(), b.f_low());
  return dt > 1e-12 && df > 1e-12;
}

std::string_view variant_name(DatasetVariant v) {
  switch (v) {
    case DatasetVariant::CleanTrain: return "clean-train";
    case DatasetVariant::CleanVal: return "clean-val";
    case DatasetVariant::ImpairedTrain: return "impaired-train";
    case DatasetVariant::ImpairedVal: return "impaired-val";
  }
  return "unknown";
}

std::optional<DatasetVariant> variant_from_name(std::string_view name) {
  for (auto v : {DatasetVariant::CleanTrain, DatasetVariant::CleanVal, DatasetVariant::ImpairedTrain,
                 DatasetVariant::ImpairedVal}) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

bool variant_is_impaired(DatasetVariant v) {
  return v == DatasetVariant::ImpairedTrain || v == DatasetVariant::ImpairedVal;
}

}  // namespace wbsig
