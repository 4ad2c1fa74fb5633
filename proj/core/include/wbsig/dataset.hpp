#pragma once

// Deterministic generation of the four dataset variants.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>

#include "wbsig/example.hpp"
#include "wbsig/impairments.hpp"
#include "wbsig/record_store.hpp"
#include "wbsig/scene.hpp"

namespace wbsig::dataset {

/// 250,000 for the training variants, 25,000 for validation.
std::size_t canonical_size(DatasetVariant v);

/// Distinct for every (variant, index < canonical_size) at a fixed dataset seed.
/// Throws ParameterError when index is out of range.
std::uint64_t derive_example_seed(std::uint64_t dataset_seed, DatasetVariant v, std::size_t index);

struct DatasetConfig {
  SceneSpec scene;
  impair::ImpairmentConfig impairments;

  static DatasetConfig for_variant(DatasetVariant v);
};

/// plan_scene, render_example and, for impaired variants, impair_example,
/// all driven by the derived seed. Samples are rounded to float32 so the
/// result equals its stored form.
WidebandExample generate_example(DatasetVariant v, std::size_t index, std::uint64_t dataset_seed);
WidebandExample generate_example(DatasetVariant v, std::size_t index, std::uint64_t dataset_seed,
                                 const DatasetConfig& cfg);

struct GenerateOptions {
  /// Defaults to canonical_size(variant); must not exceed it.
  std::optional<std::size_t> count;
  std::size_t workers = 1;
  /// Overrides DatasetConfig::for_variant.
  std::optional<DatasetConfig> config;
};

/// Writes records 0..count-1 to `out`. The bytes depend only on the seed,
/// variant, count and config. An existing complete store with the same
/// header whose digests verify is returned untouched. Failures leave the
/// INCOMPLETE marker and throw StorageError.
store::RecordStore generate_dataset(DatasetVariant v, std::uint64_t dataset_seed, const std::filesystem::path& out,
                                    const GenerateOptions& options = {});

}  // namespace wbsig::dataset
