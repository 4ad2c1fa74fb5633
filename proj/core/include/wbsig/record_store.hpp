#pragma once

// On-disk record store.
//
// A store is a directory holding
//   records.bin      concatenated record payloads
//   manifest.jsonl   one header line, then one line per record
//   INCOMPLETE       present only while a write is in progress or failed
//
// Record payload (all integers little-endian):
//   "WBSR" | u32 version | u64 index | u64 sample count
//   | sample count x (f32 I, f32 Q) | u64 text length | JSON annotations + meta
//
// Each manifest entry carries the payload offset, length and 64-bit FNV-1a
// digest as 16 lowercase hex digits.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wbsig/example.hpp"

namespace wbsig::store {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr char kRecordsFile[] = "records.bin";
inline constexpr char kManifestFile[] = "manifest.jsonl";
inline constexpr char kIncompleteMarker[] = "INCOMPLETE";

std::uint64_t fnv1a64(std::span<const std::byte> bytes);

/// Encodes with samples rounded to float32.
std::vector<std::byte> encode_record(const WidebandExample& x, std::uint64_t index);

/// Throws CorruptionError on a malformed payload or an index mismatch.
WidebandExample decode_record(std::span<const std::byte> payload, std::uint64_t expected_index);

struct ManifestHeader {
  std::uint32_t version = kFormatVersion;
  std::uint64_t dataset_seed = 0;
  DatasetVariant variant = DatasetVariant::CleanTrain;
  std::uint64_t count = 0;
  std::uint64_t num_iq_samples = 0;

  bool operator==(const ManifestHeader&) const = default;
};

struct ManifestEntry {
  std::uint64_t index = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::uint64_t digest = 0;

  bool operator==(const ManifestEntry&) const = default;
};

/// Read-only view of a completed store. Reads are independent and may run
/// concurrently.
class RecordStore {
 public:
  /// Throws NotFoundError when the directory or manifest is missing or the
  /// store is marked incomplete; CorruptionError when the manifest is invalid.
  static RecordStore open(const std::filesystem::path& dir);

  const std::filesystem::path& path() const { return dir_; }
  const ManifestHeader& header() const { return header_; }
  const std::vector<ManifestEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Digest-verified payload bytes. NotFoundError when index >= size().
  std::vector<std::byte> read_payload(std::size_t index) const;

  WidebandExample read(std::size_t index) const;

  /// True when every record's digest matches its payload.
  bool verify() const;

 private:
  std::filesystem::path dir_;
  ManifestHeader header_;
  std::vector<ManifestEntry> entries_;
};

WidebandExample read_record(const RecordStore& store, std::size_t index);

/// Appends payloads in index order. Creates the INCOMPLETE marker on
/// construction and removes it only in finish().
class RecordWriter {
 public:
  RecordWriter(const std::filesystem::path& dir, ManifestHeader header);
  RecordWriter(const RecordWriter&) = delete;
  RecordWriter& operator=(const RecordWriter&) = delete;
  ~RecordWriter();

  void append(std::span<const std::byte> payload);

  /// Flushes records, writes the manifest and clears the marker.
  RecordStore finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string digest_hex(std::uint64_t digest);

}  // namespace wbsig::store
