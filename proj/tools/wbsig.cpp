// wbsig: generate, inspect and evaluate record stores.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "spectrogram_png.hpp"
#include "wbsig/dataset.hpp"
#include "wbsig/error.hpp"
#include "wbsig/metrics.hpp"
#include "wbsig/record_store.hpp"

using namespace wbsig;
using nlohmann::json;

namespace {

const std::map<std::string, DatasetVariant> kVariantNames{{"clean-train", DatasetVariant::CleanTrain},
                                                          {"clean-val", DatasetVariant::CleanVal},
                                                          {"impaired-train", DatasetVariant::ImpairedTrain},
                                                          {"impaired-val", DatasetVariant::ImpairedVal}};

const std::map<std::string, targets::LabelGranularity> kGranularityNames{
    {"fine", targets::LabelGranularity::Fine53},
    {"family", targets::LabelGranularity::Family6},
    {"detection", targets::LabelGranularity::Detection1}};

struct GenerateArgs {
  DatasetVariant variant = DatasetVariant::CleanTrain;
  std::uint64_t seed = 0;
  std::optional<std::size_t> count;
  std::string out;
  std::size_t workers = 1;
};

struct InspectArgs {
  std::string store;
  std::size_t index = 0;
  std::string spectrogram;
};

struct EvalArgs {
  std::string preds;
  std::string truth;
  targets::LabelGranularity granularity = targets::LabelGranularity::Fine53;
  std::size_t snr_bins = 0;
};

int run_generate(const GenerateArgs& a) {
  dataset::GenerateOptions opts;
  opts.count = a.count;
  opts.workers = a.workers;
  const auto t0 = std::chrono::steady_clock::now();
  const auto store = dataset::generate_dataset(a.variant, a.seed, a.out, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%zu %s records in %s (%.1f s, %.2f records/s)\n", store.size(),
              std::string(variant_name(a.variant)).c_str(), store.path().c_str(), secs,
              static_cast<double>(store.size()) / secs);
  return 0;
}

json annotation_json(const SignalAnnotation& s) {
  return {{"class", class_name(s.signal_class)},
          {"class_id", static_cast<int>(s.signal_class)},
          {"family", family_name(s.family)},
          {"family_id", static_cast<int>(s.family)},
          {"t_start", s.t_start},
          {"t_center", s.t_start + 0.5 * s.duration},
          {"duration", s.duration},
          {"f_center", s.f_center},
          {"bandwidth", s.bandwidth},
          {"snr_db", s.snr_db}};
}

int run_inspect(const InspectArgs& a) {
  const auto store = store::RecordStore::open(a.store);
  const auto x = store.read(a.index);
  json j;
  j["index"] = a.index;
  j["variant"] = variant_name(x.meta.split);
  j["seed"] = x.meta.seed;
  j["impaired"] = x.meta.impaired;
  j["noise_psd"] = x.meta.noise_psd;
  j["applied"] = x.meta.applied;
  j["num_iq_samples"] = x.size();
  j["mean_power"] = dsp::mean_power(x.iq);
  j["annotations"] = json::array();
  for (const auto& s : x.annotations) j["annotations"].push_back(annotation_json(s));
  if (!a.spectrogram.empty()) {
    tools::write_spectrogram_png(x, a.spectrogram);
    j["spectrogram"] = a.spectrogram;
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_eval(const EvalArgs& a) {
  std::ifstream in(a.preds);
  if (!in) throw NotFoundError("cannot open " + a.preds);
  metrics::Detections preds{a.granularity, metrics::parse_predictions(in)};
  const auto store = store::RecordStore::open(a.truth);
  metrics::GroundTruth truth{a.granularity, {}};
  for (std::size_t i = 0; i < store.size(); ++i) {
    const WidebandExample x = store.read(i);
    const auto part = metrics::truth_from_examples(std::span(&x, 1), a.granularity, i);
    truth.boxes.insert(truth.boxes.end(), part.boxes.begin(), part.boxes.end());
  }
  const auto report = metrics::evaluate(preds, truth);
  std::vector<metrics::SnrBin> curve;
  if (a.snr_bins > 0) curve = metrics::mar_vs_snr(preds, truth, {}, {0.0, 30.0, a.snr_bins});
  std::cout << metrics::report_json(report, curve) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic wideband RF dataset engine"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a record store for one dataset variant");
  g->add_option("--variant", gen.variant, "Dataset variant")
      ->required()
      ->transform(CLI::CheckedTransformer(kVariantNames, CLI::ignore_case));
  g->add_option("--seed", gen.seed, "Dataset seed")->required();
  g->add_option("--count", gen.count, "Number of records (defaults to the canonical size)");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--workers", gen.workers, "Worker threads")->check(CLI::PositiveNumber);

  InspectArgs ins;
  auto* i = app.add_subcommand("inspect", "Print one record and optionally render its spectrogram");
  i->add_option("--store", ins.store, "Record store directory")->required()->check(CLI::ExistingDirectory);
  i->add_option("--index", ins.index, "Record index")->required();
  i->add_option("--spectrogram", ins.spectrogram, "PNG output path");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score predictions against a record store");
  e->add_option("--preds", ev.preds, "Prediction file")->required()->check(CLI::ExistingFile);
  e->add_option("--truth", ev.truth, "Record store directory")->required()->check(CLI::ExistingDirectory);
  e->add_option("--granularity", ev.granularity, "Label granularity")
      ->transform(CLI::CheckedTransformer(kGranularityNames, CLI::ignore_case));
  e->add_option("--snr-bins", ev.snr_bins, "Number of SNR bins over [0, 30] dB for mAR vs SNR");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*g) return run_generate(gen);
    if (*i) return run_inspect(ins);
    if (*e) return run_eval(ev);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "wbsig: %s\n", ex.what());
    return 1;
  }
  return 0;
}
