#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "wbsig/dataset.hpp"
#include "wbsig/error.hpp"
#include "wbsig/rng.hpp"

namespace wbsig::dataset {

namespace fs = std::filesystem;

std::size_t canonical_size(DatasetVariant v) {
  switch (v) {
    case DatasetVariant::CleanTrain:
    case DatasetVariant::ImpairedTrain: return 250000;
    case DatasetVariant::CleanVal:
    case DatasetVariant::ImpairedVal: return 25000;
  }
  throw ParameterError("unknown dataset variant");
}

std::uint64_t derive_example_seed(std::uint64_t dataset_seed, DatasetVariant v, std::size_t index) {
  detail::require(index < canonical_size(v), "derive_example_seed: index out of range for variant");
  // mix64 is a bijection, so distinct indices give distinct seeds per variant.
  const std::uint64_t base = mix64(dataset_seed ^ mix64(0x5742534947ULL + static_cast<std::uint64_t>(v)));
  return mix64(base + static_cast<std::uint64_t>(index) * 0x9e3779b97f4a7c15ULL);
}

DatasetConfig DatasetConfig::for_variant(DatasetVariant v) {
  return {variant_is_impaired(v) ? SceneSpec::impaired() : SceneSpec::clean(), impair::ImpairmentConfig{}};
}

WidebandExample generate_example(DatasetVariant v, std::size_t index, std::uint64_t dataset_seed) {
  return generate_example(v, index, dataset_seed, DatasetConfig::for_variant(v));
}

WidebandExample generate_example(DatasetVariant v, std::size_t index, std::uint64_t dataset_seed,
                                 const DatasetConfig& cfg) {
  const std::uint64_t seed = derive_example_seed(dataset_seed, v, index);
  Rng rng(seed);
  const auto plans = plan_scene(cfg.scene, rng);
  WidebandExample x = render_example(plans, cfg.scene, rng);
  if (variant_is_impaired(v)) x = impair::impair_example(x, cfg.impairments, rng);
  x.meta.seed = seed;
  x.meta.split = v;
  x.meta.impaired = variant_is_impaired(v);
  for (auto& s : x.iq) s = {static_cast<float>(s.real()), static_cast<float>(s.imag())};
  return x;
}

namespace {

bool existing_store_matches(const fs::path& out, const store::ManifestHeader& want) {
  try {
    const auto s = store::RecordStore::open(out);
    return s.header() == want && s.verify();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

store::RecordStore generate_dataset(DatasetVariant v, std::uint64_t dataset_seed, const fs::path& out,
                                    const GenerateOptions& options) {
  const std::size_t count = options.count.value_or(canonical_size(v));
  detail::require(count > 0 && count <= canonical_size(v), "generate_dataset: count must be in [1, canonical size]");
  detail::require(options.workers > 0, "generate_dataset: workers must be positive");
  const DatasetConfig cfg = options.config.value_or(DatasetConfig::for_variant(v));
  cfg.scene.validate();
  if (variant_is_impaired(v)) cfg.impairments.validate();

  const store::ManifestHeader header{store::kFormatVersion, dataset_seed, v, count, cfg.scene.num_iq_samples};
  if (existing_store_matches(out, header)) return store::RecordStore::open(out);

  store::RecordWriter writer(out, header);

  // Records are produced in batches and appended in index order.
  const std::size_t batch = std::max<std::size_t>(4, 2 * options.workers);
  std::vector<std::vector<std::byte>> slots(batch);
  for (std::size_t first = 0; first < count; first += batch) {
    const std::size_t n = std::min(batch, count - first);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto work = [&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          slots[i] = store::encode_record(generate_example(v, first + i, dataset_seed, cfg), first + i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const std::size_t threads = std::min(options.workers, n);
    if (threads == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    for (std::size_t i = 0; i < n; ++i) writer.append(slots[i]);
  }
  return writer.finish();
}

}  // namespace wbsig::dataset
