#include "incube/snapshot.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "incube/error.hpp"

namespace incube {

namespace {

constexpr std::string_view kMagic = "INCUBESN";

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i64(std::int64_t v) { put(static_cast<std::uint64_t>(v), 8); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void raw(std::string_view s) { buf_.append(s); }
  std::string& buffer() { return buf_; }

 private:
  void put(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(get(8)); }
  std::string str() {
    const std::uint32_t n = u32();
    return std::string(take(n));
  }
  std::string_view take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw SnapshotError(SnapshotError::Kind::kCorrupt, "snapshot is truncated");
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  // Guards element counts before allocating.
  std::size_t count(std::uint64_t n, std::size_t min_bytes_each) {
    if (min_bytes_each && n > (bytes_.size() - pos_) / min_bytes_each)
      throw SnapshotError(SnapshotError::Kind::kCorrupt, "snapshot is truncated");
    return static_cast<std::size_t>(n);
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::uint64_t get(int bytes) {
    const auto s = take(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(s[i])) << (8 * i);
    return v;
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths.
  while (!bytes.empty()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size(), 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), chunk);
    bytes.remove_prefix(chunk);
  }
  return static_cast<std::uint32_t>(crc);
}

[[noreturn]] void corrupt(const std::string& what) { throw SnapshotError(SnapshotError::Kind::kCorrupt, what); }

}  // namespace

std::string encode_snapshot(const FactTable& t) {
  Writer w;
  w.raw(kMagic);
  w.u32(kSnapshotFormatVersion);
  w.str(t.codebook_version);
  w.u64(t.rows);

  w.u32(static_cast<std::uint32_t>(t.dimensions.size()));
  for (const auto& d : t.dimensions) {
    w.str(d.hierarchy.name);
    w.u32(static_cast<std::uint32_t>(d.hierarchy.levels.size()));
    for (std::size_t level = 0; level < d.hierarchy.levels.size(); ++level) {
      w.str(d.hierarchy.levels[level].name);
      w.u8(static_cast<std::uint8_t>(d.hierarchy.levels[level].domain));
      w.u32(static_cast<std::uint32_t>(d.levels[level].size()));
      for (const auto& e : d.levels[level].entries()) {
        w.u32(e.parent);
        w.str(e.label);
      }
      for (std::uint32_t k : d.keys[level]) w.u32(k);
    }
  }

  w.u32(static_cast<std::uint32_t>(t.measures.size()));
  for (const auto& m : t.measures) {
    w.str(m.name);
    for (std::int64_t v : m.values) w.i64(v);
    for (std::size_t i = 0; i < t.rows; i += 8) {
      std::uint8_t byte = 0;
      for (std::size_t b = 0; b < 8 && i + b < t.rows; ++b)
        if (m.unknown[i + b]) byte |= static_cast<std::uint8_t>(1u << b);
      w.u8(byte);
    }
  }

  for (const auto& id : t.eventids) {
    w.u16(static_cast<std::uint16_t>(id.year));
    w.u8(static_cast<std::uint8_t>(id.month));
    w.u8(static_cast<std::uint8_t>(id.day));
    w.u8(static_cast<std::uint8_t>(id.sequence));
  }

  w.u32(static_cast<std::uint32_t>(t.items.items.size()));
  for (const auto& item : t.items.items) w.str(item);
  for (std::uint32_t o : t.items.offsets) w.u32(o);
  w.u32(static_cast<std::uint32_t>(t.items.ids.size()));
  for (std::uint32_t id : t.items.ids) w.u32(id);

  w.u32(checksum(w.buffer()));
  return std::move(w.buffer());
}

FactTable decode_snapshot(std::string_view bytes, std::string_view codebook_version) {
  if (bytes.size() < kMagic.size() + 4 || bytes.substr(0, kMagic.size()) != kMagic) corrupt("not a cube snapshot");
  Reader r(bytes.substr(0, bytes.size() >= 4 ? bytes.size() - 4 : 0));
  r.take(kMagic.size());
  const std::uint32_t format = r.u32();
  if (format != kSnapshotFormatVersion)
    throw SnapshotError(SnapshotError::Kind::kVersionMismatch, "snapshot format version " + std::to_string(format) +
                                                                   " is not supported (expected " +
                                                                   std::to_string(kSnapshotFormatVersion) + ")");
  {
    Reader trailer(bytes.substr(bytes.size() - 4));
    if (trailer.u32() != checksum(bytes.substr(0, bytes.size() - 4))) corrupt("snapshot checksum mismatch");
  }

  FactTable t;
  t.codebook_version = r.str();
  if (!codebook_version.empty() && t.codebook_version != codebook_version)
    throw SnapshotError(SnapshotError::Kind::kVersionMismatch, "snapshot was built with codebook version '" +
                                                                   t.codebook_version + "', expected '" +
                                                                   std::string(codebook_version) + "'");
  t.rows = r.count(r.u64(), 0);

  const std::size_t ndims = r.count(r.u32(), 8);
  for (std::size_t d = 0; d < ndims; ++d) {
    DimensionColumns dim;
    dim.hierarchy.name = r.str();
    const std::size_t nlevels = r.count(r.u32(), 9);
    for (std::size_t level = 0; level < nlevels; ++level) {
      Level lv;
      lv.name = r.str();
      const std::uint8_t domain = r.u8();
      if (domain > static_cast<std::uint8_t>(LevelDomain::kText)) corrupt("bad level domain");
      lv.domain = static_cast<LevelDomain>(domain);
      dim.hierarchy.levels.push_back(std::move(lv));

      MemberDictionary dict;
      const std::size_t members = r.count(r.u32(), 8);
      for (std::size_t i = 0; i < members; ++i) {
        const std::uint32_t parent = r.u32();
        const std::string label = r.str();
        if (level == 0 ? parent != MemberDictionary::kNoParent : parent >= dim.levels.back().size())
          corrupt("member parent out of range");
        if (dict.intern(parent, label) != i) corrupt("duplicate member in dictionary");
      }
      std::vector<std::uint32_t> keys(r.count(t.rows, 4));
      for (std::size_t row = 0; row < t.rows; ++row) {
        keys[row] = r.u32();
        if (keys[row] >= dict.size()) corrupt("member key out of range");
        if (level > 0 && dict.entry(keys[row]).parent != dim.keys.back()[row]) corrupt("member key breaks its path");
      }
      dim.levels.push_back(std::move(dict));
      dim.keys.push_back(std::move(keys));
    }
    t.dimensions.push_back(std::move(dim));
  }

  const std::size_t nmeasures = r.count(r.u32(), 4);
  for (std::size_t m = 0; m < nmeasures; ++m) {
    MeasureColumn col;
    col.name = r.str();
    col.values.resize(r.count(t.rows, 8));
    for (auto& v : col.values) v = r.i64();
    col.unknown.resize(t.rows);
    for (std::size_t i = 0; i < t.rows; i += 8) {
      const std::uint8_t byte = r.u8();
      for (std::size_t b = 0; b < 8 && i + b < t.rows; ++b) col.unknown[i + b] = (byte >> b) & 1u;
    }
    t.measures.push_back(std::move(col));
  }

  t.eventids.resize(r.count(t.rows, 5));
  for (auto& id : t.eventids) {
    id.year = r.u16();
    id.month = r.u8();
    id.day = r.u8();
    id.sequence = r.u8();
  }

  const std::size_t nitems = r.count(r.u32(), 4);
  for (std::size_t i = 0; i < nitems; ++i) t.items.items.push_back(r.str());
  t.items.offsets.resize(r.count(t.rows + 1, 4));
  for (auto& o : t.items.offsets) o = r.u32();
  t.items.ids.resize(r.count(r.u32(), 4));
  for (auto& id : t.items.ids) {
    id = r.u32();
    if (id >= nitems) corrupt("item id out of range");
  }
  if (t.items.offsets.front() != 0 || t.items.offsets.back() != t.items.ids.size()) corrupt("bad item offsets");
  for (std::size_t i = 1; i < t.items.offsets.size(); ++i)
    if (t.items.offsets[i] < t.items.offsets[i - 1]) corrupt("bad item offsets");
  if (!r.at_end()) corrupt("trailing bytes in snapshot");
  return t;
}

void save_snapshot(const FactTable& table, const std::filesystem::path& path) {
  const std::string bytes = encode_snapshot(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError(SnapshotError::Kind::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw SnapshotError(SnapshotError::Kind::kIo, "cannot write " + path.string());
}

FactTable load_snapshot(const std::filesystem::path& path, std::string_view codebook_version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError(SnapshotError::Kind::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_snapshot(buf.str(), codebook_version);
}

}  // namespace incube
