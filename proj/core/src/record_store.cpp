#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "wbsig/error.hpp"
#include "wbsig/record_store.hpp"

namespace wbsig::store {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 4> kMagic{'W', 'B', 'S', 'R'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 8;

template <typename T>
void put_le(std::vector<std::byte>& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::byte>((u >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(std::span<const std::byte> in, std::size_t pos) {
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::make_unsigned_t<T>>(in[pos + i]) << (8 * i);
  return static_cast<T>(u);
}

json annotation_json(const SignalAnnotation& a) {
  return {{"class", class_name(a.signal_class)}, {"family", family_name(a.family)}, {"t_start", a.t_start},
          {"duration", a.duration},            {"f_center", a.f_center},          {"bandwidth", a.bandwidth},
          {"snr_db", a.snr_db}};
}

SignalAnnotation annotation_from_json(const json& j) {
  const auto c = class_from_name(j.at("class").get<std::string>());
  const auto f = family_from_name(j.at("family").get<std::string>());
  if (!c || !f || class_to_family(*c) != *f) throw CorruptionError("record: unknown class or family");
  SignalAnnotation a;
  a.signal_class = *c;
  a.family = *f;
  a.t_start = j.at("t_start").get<double>();
  a.duration = j.at("duration").get<double>();
  a.f_center = j.at("f_center").get<double>();
  a.bandwidth = j.at("bandwidth").get<double>();
  a.snr_db = j.at("snr_db").get<double>();
  return a;
}

DatasetVariant variant_from_json(const json& j) {
  const auto v = variant_from_name(j.get<std::string>());
  if (!v) throw CorruptionError("unknown dataset variant");
  return *v;
}

std::vector<std::byte> read_range(const fs::path& file, std::uint64_t offset, std::uint64_t length) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + file.string());
  in.seekg(static_cast<std::streamoff>(offset));
  std::vector<std::byte> buf(length);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(length));
  if (static_cast<std::uint64_t>(in.gcount()) != length) throw CorruptionError("record extends past end of " + file.string());
  return buf;
}

std::string header_line(const ManifestHeader& h) {
  json j{{"format", "wbsig-records"},
         {"version", h.version},
         {"dataset_seed", h.dataset_seed},
         {"variant", variant_name(h.variant)},
         {"count", h.count},
         {"num_iq_samples", h.num_iq_samples}};
  return j.dump();
}

std::string entry_line(const ManifestEntry& e) {
  json j{{"index", e.index}, {"offset", e.offset}, {"length", e.length}, {"digest", digest_hex(e.digest)}};
  return j.dump();
}

std::uint64_t parse_hex(const std::string& s) {
  if (s.size() != 16) throw CorruptionError("manifest: digest must be 16 hex digits");
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else throw CorruptionError("manifest: digest must be lowercase hex");
  }
  return v;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::byte> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(std::uint64_t digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, digest >>= 4) s[static_cast<std::size_t>(i)] = kHex[digest & 0xf];
  return s;
}

std::vector<std::byte> encode_record(const WidebandExample& x, std::uint64_t index) {
  json text;
  text["annotations"] = json::array();
  for (const auto& a : x.annotations) text["annotations"].push_back(annotation_json(a));
  text["meta"] = {{"seed", x.meta.seed},
                  {"split", variant_name(x.meta.split)},
                  {"impaired", x.meta.impaired},
                  {"noise_psd", x.meta.noise_psd},
                  {"applied", x.meta.applied}};
  const std::string body = text.dump();

  std::vector<std::byte> out;
  out.reserve(kHeaderBytes + 8 * x.size() + 8 + body.size());
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::uint64_t>(out, index);
  put_le<std::uint64_t>(out, x.size());
  for (const auto& s : x.iq) {
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(s.real())));
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(s.imag())));
  }
  put_le<std::uint64_t>(out, body.size());
  for (char c : body) out.push_back(static_cast<std::byte>(c));
  return out;
}

WidebandExample decode_record(std::span<const std::byte> payload, std::uint64_t expected_index) {
  if (payload.size() < kHeaderBytes) throw CorruptionError("record: truncated header");
  for (std::size_t i = 0; i < kMagic.size(); ++i) {
    if (static_cast<char>(payload[i]) != kMagic[i]) throw CorruptionError("record: bad magic");
  }
  if (get_le<std::uint32_t>(payload, 4) != kFormatVersion) throw CorruptionError("record: unsupported version");
  if (get_le<std::uint64_t>(payload, 8) != expected_index) throw CorruptionError("record: index mismatch");
  const auto n = get_le<std::uint64_t>(payload, 16);
  if (n > (payload.size() - kHeaderBytes) / 8) throw CorruptionError("record: sample count exceeds payload");
  std::size_t pos = kHeaderBytes;

  WidebandExample x;
  x.iq.resize(n);
  for (auto& s : x.iq) {
    const auto re = std::bit_cast<float>(get_le<std::uint32_t>(payload, pos));
    const auto im = std::bit_cast<float>(get_le<std::uint32_t>(payload, pos + 4));
    s = {re, im};
    pos += 8;
  }
  if (payload.size() - pos < 8) throw CorruptionError("record: truncated text length");
  const auto len = get_le<std::uint64_t>(payload, pos);
  pos += 8;
  if (payload.size() - pos != len) throw CorruptionError("record: text length mismatch");

  try {
    const auto text = json::parse(reinterpret_cast<const char*>(payload.data() + pos),
                                  reinterpret_cast<const char*>(payload.data() + pos + len));
    for (const auto& a : text.at("annotations")) x.annotations.push_back(annotation_from_json(a));
    const auto& m = text.at("meta");
    x.meta.seed = m.at("seed").get<std::uint64_t>();
    x.meta.split = variant_from_json(m.at("split"));
    x.meta.impaired = m.at("impaired").get<bool>();
    x.meta.noise_psd = m.at("noise_psd").get<double>();
    x.meta.applied = m.at("applied").get<std::uint32_t>();
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("record: invalid annotation block: ") + e.what());
  }
  return x;
}

// --- RecordStore -------------------------------------------------------------

RecordStore RecordStore::open(const fs::path& dir) {
  if (fs::exists(dir / kIncompleteMarker)) throw NotFoundError("store is incomplete: " + dir.string());
  std::ifstream in(dir / kManifestFile);
  if (!in) throw NotFoundError("no manifest in " + dir.string());

  RecordStore s;
  s.dir_ = dir;
  std::string line;
  try {
    if (!std::getline(in, line)) throw CorruptionError("manifest: empty");
    const json h = json::parse(line);
    if (h.at("format").get<std::string>() != "wbsig-records") throw CorruptionError("manifest: unknown format");
    s.header_.version = h.at("version").get<std::uint32_t>();
    if (s.header_.version != kFormatVersion) throw CorruptionError("manifest: unsupported version");
    s.header_.dataset_seed = h.at("dataset_seed").get<std::uint64_t>();
    s.header_.variant = variant_from_json(h.at("variant"));
    s.header_.count = h.at("count").get<std::uint64_t>();
    s.header_.num_iq_samples = h.at("num_iq_samples").get<std::uint64_t>();

    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json e = json::parse(line);
      ManifestEntry entry{e.at("index").get<std::uint64_t>(), e.at("offset").get<std::uint64_t>(),
                          e.at("length").get<std::uint64_t>(), parse_hex(e.at("digest").get<std::string>())};
      if (entry.index != s.entries_.size()) throw CorruptionError("manifest: entries out of order");
      s.entries_.push_back(entry);
    }
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("manifest: ") + e.what());
  }
  if (s.entries_.size() != s.header_.count) throw CorruptionError("manifest: count does not match entries");
  return s;
}

std::vector<std::byte> RecordStore::read_payload(std::size_t index) const {
  if (index >= entries_.size()) {
    throw NotFoundError("record " + std::to_string(index) + " not in store of " + std::to_string(entries_.size()));
  }
  const ManifestEntry& e = entries_[index];
  auto bytes = read_range(dir_ / kRecordsFile, e.offset, e.length);
  if (fnv1a64(bytes) != e.digest) throw CorruptionError("record " + std::to_string(index) + ": digest mismatch");
  return bytes;
}

WidebandExample RecordStore::read(std::size_t index) const {
  return decode_record(read_payload(index), index);
}

bool RecordStore::verify() const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    try {
      read_payload(i);
    } catch (const CorruptionError&) {
      return false;
    } catch (const NotFoundError&) {
      return false;
    }
  }
  return true;
}

WidebandExample read_record(const RecordStore& store, std::size_t index) {
  return store.read(index);
}

// --- RecordWriter ------------------------------------------------------------

struct RecordWriter::Impl {
  fs::path dir;
  ManifestHeader header;
  std::ofstream records;
  std::vector<ManifestEntry> entries;
  std::uint64_t offset = 0;
  bool finished = false;
};

RecordWriter::RecordWriter(const fs::path& dir, ManifestHeader header) : impl_(std::make_unique<Impl>()) {
  impl_->dir = dir;
  impl_->header = header;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StorageError("cannot create " + dir.string() + ": " + ec.message());
  {
    std::ofstream marker(dir / kIncompleteMarker, std::ios::trunc);
    if (!marker) throw StorageError("cannot write marker in " + dir.string());
  }
  fs::remove(dir / kManifestFile, ec);
  impl_->records.open(dir / kRecordsFile, std::ios::binary | std::ios::trunc);
  if (!impl_->records) throw StorageError("cannot open " + (dir / kRecordsFile).string());
}

RecordWriter::~RecordWriter() = default;

void RecordWriter::append(std::span<const std::byte> payload) {
  Impl& w = *impl_;
  if (w.finished) throw StorageError("append after finish");
  w.records.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!w.records) throw StorageError("write failed on " + (w.dir / kRecordsFile).string());
  w.entries.push_back({w.entries.size(), w.offset, payload.size(), fnv1a64(payload)});
  w.offset += payload.size();
}

RecordStore RecordWriter::finish() {
  Impl& w = *impl_;
  w.records.close();
  if (!w.records) throw StorageError("flush failed on " + (w.dir / kRecordsFile).string());
  w.header.count = w.entries.size();

  const fs::path tmp = w.dir / (std::string(kManifestFile) + ".tmp");
  {
    std::ofstream m(tmp, std::ios::trunc);
    m << header_line(w.header) << '\n';
    for (const auto& e : w.entries) m << entry_line(e) << '\n';
    m.close();
    if (!m) throw StorageError("cannot write manifest in " + w.dir.string());
  }
  std::error_code ec;
  fs::rename(tmp, w.dir / kManifestFile, ec);
  if (ec) throw StorageError("cannot publish manifest: " + ec.message());
  fs::remove(w.dir / kIncompleteMarker, ec);
  if (ec) throw StorageError("cannot clear marker: " + ec.message());
  w.finished = true;
  return RecordStore::open(w.dir);
}

}  // namespace wbsig::store
