#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>

#include "incube/cube.hpp"

namespace incube {

inline constexpr std::uint32_t kSnapshotFormatVersion = 1;

// Binary layout (little-endian):
//   "INCUBESN"  u32 format version  str codebook version  u64 rows
//   u32 dimensions, each: str name, u32 levels, each level: str name,
//       u8 domain, u32 members, each member: u32 parent, str label;
//       then rows x u32 keys per level
//   u32 measures, each: str name, rows x i64 values, ceil(rows/8) mask bytes
//   rows x event id (u16 year, u8 month, u8 day, u8 case number)
//   u32 items, each str; (rows+1) x u32 offsets; u32 count, count x u32 ids
//   u32 CRC-32 of every preceding byte
// where str is a u32 byte length followed by UTF-8 bytes.
std::string encode_snapshot(const FactTable& table);

// Throws SnapshotError: kVersionMismatch for an unknown format version or a
// codebook version other than `codebook_version`, kCorrupt for anything
// malformed. An empty `codebook_version` accepts any.
FactTable decode_snapshot(std::string_view bytes, std::string_view codebook_version);

void save_snapshot(const FactTable& table, const std::filesystem::path& path);
// Adds kIo for unreadable files.
FactTable load_snapshot(const std::filesystem::path& path, std::string_view codebook_version);

}  // namespace incube
