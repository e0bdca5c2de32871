#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace incube {

using Date = std::chrono::year_month_day;

// Parses "YYYY-MM-DD" (also accepts "M/D/YYYY"). Throws ParseError.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);

// ---------------------------------------------------------------------------
// Event ids: 12 digits, yyyymmdd + "00" + two-digit case number.

struct EventId {
  int year = 1970;
  int month = 1;
  int day = 1;
  int sequence = 0;

  Date date() const;

  // Date order, then case number.
  auto operator<=>(const EventId&) const = default;
};

EventId parse_event_id(std::string_view text);
std::string format_event_id(const EventId& id);

// ---------------------------------------------------------------------------
// Sentinel-aware numeric cells.

class CodedCell {
 public:
  CodedCell() = default;

  static CodedCell known(std::int64_t v) { return CodedCell(v); }
  static CodedCell unknown() { return CodedCell(); }

  bool is_known() const { return value_.has_value(); }
  // Throws LookupError when unknown.
  std::int64_t value() const;
  std::int64_t value_or(std::int64_t fallback) const { return value_.value_or(fallback); }

  bool operator==(const CodedCell&) const = default;

 private:
  explicit CodedCell(std::int64_t v) : value_(v) {}
  std::optional<std::int64_t> value_;
};

// How a numeric field spells "unknown". Every kind also accepts a blank cell
// and the literal text "Unknown".
enum class FieldKind {
  kCount,     // -99
  kTriState,  // -9
  kDatePart,  // 0
  kCode,      // blank only
};

std::string_view sentinel_spelling(FieldKind kind);

CodedCell decode_coded_numeric(FieldKind kind, std::string_view raw);

enum class TriState : std::int8_t { kNo = 0, kYes = 1, kUnknown = -9 };

std::string_view tri_state_label(TriState t);  // "Yes" / "No" / "Unknown"

// ---------------------------------------------------------------------------
// Code tables.

// One coded domain (code -> label). Labels may repeat under distinct codes.
class CodeTable {
 public:
  CodeTable() = default;
  explicit CodeTable(std::string name) : name_(std::move(name)) {}

  void add(int code, std::string label);

  const std::string& name() const { return name_; }
  bool contains(int code) const { return labels_.count(code) != 0; }
  // Throws LookupError for absent codes.
  const std::string& label(int code) const;
  // Lowest code carrying exactly this label.
  std::optional<int> find(std::string_view label) const;
  // True when the code's label is literally "Unknown".
  bool is_unknown(int code) const;

  const std::map<int, std::string>& entries() const { return labels_; }
  std::size_t size() const { return labels_.size(); }

 private:
  std::string name_;
  std::map<int, std::string> labels_;
};

enum class WatershedEvent { kIndependence, kTermination, kUnification, kRename };

std::string_view watershed_event_name(WatershedEvent e);

struct Watershed {
  int country = 0;
  WatershedEvent event = WatershedEvent::kIndependence;
  Date date;
  std::optional<int> counterpart;
};

struct CountryVerdict {
  enum class Kind { kValid, kAnachronism };
  Kind kind = Kind::kValid;
  std::optional<int> suggestion;

  bool valid() const { return kind == Kind::kValid; }
  bool operator==(const CountryVerdict&) const = default;
};

// Half-open validity window [from, until) for a country code. Absent bounds
// are unbounded.
struct ValidityWindow {
  std::optional<Date> from;
  std::optional<Date> until;
  std::optional<int> before_suggestion;
  std::optional<int> after_suggestion;
};

struct PropertyBand {
  int code = 0;
  std::string name;
  std::optional<std::int64_t> above;  // value must be > above
  std::optional<std::int64_t> below;  // value must be < below

  bool admits(std::int64_t usd) const;
};

// Every coded domain of the incident codebook. Immutable once constructed.
class CodebookTables {
 public:
  // Loads the tab-delimited table files from a directory. Throws ParseError
  // on malformed rows and LookupError when cross-table invariants fail.
  static CodebookTables load(const std::filesystem::path& dir);
  // Same, from in-memory file contents keyed by file name.
  static CodebookTables from_files(const std::map<std::string, std::string>& files);
  // The tables bundled with the build.
  static const CodebookTables& builtin();

  const std::string& version() const { return version_; }

  const CodeTable& countries() const { return countries_; }
  const CodeTable& regions() const { return regions_; }
  const CodeTable& attack_types() const { return attack_types_; }
  const CodeTable& target_types() const { return target_types_; }
  const CodeTable& entity_types() const { return entity_types_; }
  const CodeTable& weapon_types() const { return weapon_types_; }
  const CodeTable& weapon_subtypes() const { return weapon_subtypes_; }
  const CodeTable& claim_modes() const { return claim_modes_; }
  const CodeTable& hostage_outcomes() const { return hostage_outcomes_; }
  const CodeTable& property_extents() const { return property_extents_; }
  const CodeTable& alternatives() const { return alternatives_; }
  const std::vector<Watershed>& watersheds() const { return watersheds_; }

  const std::vector<int>& region_members(int region) const;
  // Throws LookupError for codes absent from the country table or assigned to
  // no region (nationality-only codes such as 296 Kurdish).
  int region_of_country(int country) const;
  std::optional<int> find_region_of_country(int country) const;

  ValidityWindow country_validity_window(int country) const;
  CountryVerdict country_validity_at_date(int country, const Date& date) const;

  int weapon_subtype_parent(int subtype) const;
  const PropertyBand& property_band(int propextent) const;

 private:
  void check_invariants() const;

  std::string version_;
  CodeTable countries_{"country"};
  CodeTable regions_{"region"};
  CodeTable attack_types_{"attacktype"};
  CodeTable target_types_{"targtype"};
  CodeTable entity_types_{"entity"};
  CodeTable weapon_types_{"weaptype"};
  CodeTable weapon_subtypes_{"weapsubtype"};
  CodeTable claim_modes_{"claimmode"};
  CodeTable hostage_outcomes_{"hostkidoutcome"};
  CodeTable property_extents_{"propextent"};
  CodeTable alternatives_{"alternative"};
  std::map<int, std::vector<int>> region_members_;
  std::map<int, int> country_region_;
  std::map<int, int> subtype_parent_;
  std::map<int, PropertyBand> property_bands_;
  std::vector<Watershed> watersheds_;
};

}  // namespace incube
