#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "incube/codebook.hpp"
#include "incube/ingest.hpp"

namespace incube {

// Label of the distinguished member for unknown or absent values.
inline constexpr std::string_view kUnknownMember = "Unknown";

enum class LevelDomain { kCoded, kInteger, kText };

struct Level {
  std::string name;
  LevelDomain domain = LevelDomain::kCoded;

  bool operator==(const Level&) const = default;
};

struct Hierarchy {
  std::string name;
  std::vector<Level> levels;

  int depth() const { return static_cast<int>(levels.size()); }
  bool operator==(const Hierarchy&) const = default;
};

// time, space, then the single-level dimensions in a fixed order.
const std::vector<Hierarchy>& standard_hierarchies();
// Case-insensitive lookup; throws LookupError.
const Hierarchy& find_hierarchy(std::string_view name);

struct MemberPath {
  std::string hierarchy;
  std::vector<std::string> members;  // one label per level

  // No known member below an unknown one.
  bool cascade_ok() const;
  bool operator==(const MemberPath&) const = default;
};

// year -> month -> day. Labels are "1993", "07", "25".
MemberPath time_path(const Incident& inc);

// region -> country -> provstate -> city. The region is derived from the
// country code, never read from the record. Throws LookupError for countries
// outside every region.
MemberPath space_path(const Incident& inc, const CodebookTables& tables);

// The single-level dimensions, keyed on slot 1 of multi-slot fields.
const std::vector<std::string>& flat_dimensions();
std::string flat_member(const Incident& inc, std::string_view dim, const CodebookTables& tables);

// Dispatches to time_path / space_path / flat_member.
MemberPath member_path(const Incident& inc, const Hierarchy& h, const CodebookTables& tables);

// Dimensions that can be itemized for mining. Unlike the cube, every
// populated slot of a multi-slot field contributes.
const std::vector<std::string>& item_dimensions();
// Accepts the aliases "target" (targtype) and "perpetrator" (gname).
// Throws LookupError.
std::string canonical_item_dimension(std::string_view dim);
// Distinct known members of every slot, in slot order; never "Unknown".
std::vector<std::string> slot_members(const Incident& inc, std::string_view item_dim, const CodebookTables& tables);

// Days between the start date and the resolution of an extended incident;
// nullopt when either date is incomplete.
std::optional<int> extended_duration_days(const Incident& inc);

}  // namespace incube
