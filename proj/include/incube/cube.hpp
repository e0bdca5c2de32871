#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "incube/codebook.hpp"
#include "incube/dimensions.hpp"
#include "incube/ingest.hpp"
#include "json.hpp"

namespace incube {

enum class Aggregator { kCount, kSum };

struct MeasureDef {
  std::string name;
  Aggregator aggregator = Aggregator::kSum;
};

// incident_count first, then the additive numeric fields.
const std::vector<MeasureDef>& measure_catalog();
// Throws QueryError.
const MeasureDef& find_measure(std::string_view name);

// Members of one level. Ids are dense and assigned in insertion order; a
// member is keyed on its parent id so equal labels under different parents
// stay distinct.
class MemberDictionary {
 public:
  static constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

  struct Entry {
    std::uint32_t parent = kNoParent;
    std::string label;
    bool operator==(const Entry&) const = default;
  };

  std::uint32_t intern(std::uint32_t parent, std::string_view label);
  std::optional<std::uint32_t> find(std::uint32_t parent, std::string_view label) const;

  const Entry& entry(std::uint32_t id) const { return entries_.at(id); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  bool operator==(const MemberDictionary& other) const { return entries_ == other.entries_; }

 private:
  static std::string key(std::uint32_t parent, std::string_view label);

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct DimensionColumns {
  Hierarchy hierarchy;
  std::vector<MemberDictionary> levels;          // one per level
  std::vector<std::vector<std::uint32_t>> keys;  // keys[level][row]

  // Labels from the root down to `depth` levels.
  std::vector<std::string> path(std::size_t row, int depth) const;
  bool operator==(const DimensionColumns&) const = default;
};

struct MeasureColumn {
  std::string name;
  std::vector<std::int64_t> values;  // 0 where unknown
  std::vector<std::uint8_t> unknown;

  bool operator==(const MeasureColumn&) const = default;
};

// Every item of every row, for mining straight from a snapshot. Row r owns
// ids[offsets[r] .. offsets[r+1]).
struct ItemStore {
  std::vector<std::string> items;
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> ids;

  std::vector<std::string> row_items(std::size_t row) const;
  bool operator==(const ItemStore&) const = default;
};

struct FactTable {
  std::string codebook_version;
  std::size_t rows = 0;
  std::vector<DimensionColumns> dimensions;
  std::vector<MeasureColumn> measures;  // incident_count is implicit
  std::vector<EventId> eventids;
  ItemStore items;

  // Throws QueryError.
  const DimensionColumns& dimension(std::string_view hierarchy) const;
  const MeasureColumn* measure(std::string_view name) const;

  bool operator==(const FactTable&) const = default;
};

// One row per incident. Throws LookupError for countries outside every
// region; callers drop Error-severity records first.
FactTable build_facts(std::span<const Incident> incidents, const CodebookTables& tables);

// ---------------------------------------------------------------------------
// Queries.

struct GroupBy {
  std::string hierarchy;
  int depth = 1;
  bool operator==(const GroupBy&) const = default;
};

// Keeps facts whose member at (dim, depth) is one of `members`. A tri-state
// requirement is shorthand for the member "Yes", "No" or "Unknown" of a
// tri-state dimension.
struct Filter {
  std::string dim;
  int depth = 1;
  std::vector<std::string> members;
  std::optional<TriState> tristate;
  bool operator==(const Filter&) const = default;
};

struct CellQuery {
  std::vector<GroupBy> group_by;
  std::vector<Filter> filters;
  std::vector<std::string> measures;  // empty means incident_count
  bool operator==(const CellQuery&) const = default;
};

struct MeasureCell {
  std::int64_t sum = 0;
  std::int64_t known = 0;
  std::int64_t unknown = 0;
  bool operator==(const MeasureCell&) const = default;
};

struct Cell {
  std::vector<std::string> path;  // member labels of every axis, concatenated
  std::vector<MeasureCell> values;
  bool operator==(const Cell&) const = default;
};

struct CellResult {
  std::vector<GroupBy> axes;
  std::vector<std::string> measures;
  std::vector<Cell> cells;  // sorted by path
  std::int64_t total = 0;   // facts passing the filters
  bool operator==(const CellResult&) const = default;
};

// "space", "space:2" or "space.country". The depth defaults to 1. Accepts
// the aliases targtype and gname. Throws QueryError.
GroupBy parse_level_ref(std::string_view text);
bool is_tri_state_dimension(std::string_view hierarchy);

// Canonical hierarchy names, depth bounds, known measures and existing
// filter members. Throws QueryError.
CellQuery normalize_query(const FactTable& table, const CellQuery& q);

CellResult aggregate(const FactTable& table, const CellQuery& q);

// Both throw QueryError when the hierarchy is not grouped or the depth
// would leave [1, depth()].
CellQuery rollup(const CellQuery& q, std::string_view hierarchy);
CellQuery drilldown(const CellQuery& q, std::string_view hierarchy);
// Swaps two group-by axes.
CellQuery pivot(const CellQuery& q, std::size_t a, std::size_t b);
// `dim` is a level reference as accepted by parse_level_ref.
CellQuery slice(const FactTable& table, const CellQuery& q, std::string_view dim, const std::string& member);
CellQuery dice(const FactTable& table, const CellQuery& q, std::string_view dim,
               const std::vector<std::string>& members);

// ---------------------------------------------------------------------------
// Serialization.

nlohmann::json query_to_json(const CellQuery& q);
// Throws QueryError for structurally invalid input.
CellQuery query_from_json(const nlohmann::json& j);
nlohmann::json result_to_json(const CellResult& r);
// Axis level columns, then value/known/unknown per measure.
void write_result(std::ostream& out, const CellResult& r, char delimiter = ',');

}  // namespace incube
