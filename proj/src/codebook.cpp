#include "incube/codebook.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "incube/error.hpp"
#include "incube/strings.hpp"

namespace incube {

namespace detail {
const std::map<std::string, std::string>& embedded_codebook_files();
}  // namespace detail

using namespace std::chrono;

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

int digits_to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  int y = 0, m = 0, d = 0;
  if (text.size() == 10 && text[4] == '-' && text[7] == '-' && all_digits(text.substr(0, 4)) &&
      all_digits(text.substr(5, 2)) && all_digits(text.substr(8, 2))) {
    y = digits_to_int(text.substr(0, 4));
    m = digits_to_int(text.substr(5, 2));
    d = digits_to_int(text.substr(8, 2));
  } else {
    const auto parts = split(text, '/');
    if (parts.size() != 3 || !all_digits(parts[0]) || !all_digits(parts[1]) || parts[2].size() != 4 ||
        !all_digits(parts[2]) || parts[0].size() > 2 || parts[1].size() > 2)
      throw ParseError("not a date: '" + std::string(text) + "'");
    m = digits_to_int(parts[0]);
    d = digits_to_int(parts[1]);
    y = digits_to_int(parts[2]);
  }
  const Date date{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!date.ok()) throw ParseError("not a calendar date: '" + std::string(text) + "'");
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

// ---------------------------------------------------------------------------

Date EventId::date() const {
  return Date{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
              std::chrono::day{static_cast<unsigned>(day)}};
}

EventId parse_event_id(std::string_view text) {
  if (text.size() != 12)
    throw ParseError("event id must be 12 digits, got " + std::to_string(text.size()) + " characters: '" +
                     std::string(text) + "'");
  if (!all_digits(text)) throw ParseError("event id has non-digit characters: '" + std::string(text) + "'");
  if (text.substr(8, 2) != "00") throw ParseError("event id digits 9-10 must be \"00\": '" + std::string(text) + "'");
  EventId id;
  id.year = digits_to_int(text.substr(0, 4));
  id.month = digits_to_int(text.substr(4, 2));
  id.day = digits_to_int(text.substr(6, 2));
  id.sequence = digits_to_int(text.substr(10, 2));
  if (id.year < 1970 || id.year > 2100)
    throw ParseError("event id year out of range 1970-2100: '" + std::string(text) + "'");
  if (!id.date().ok()) throw ParseError("event id carries no calendar date: '" + std::string(text) + "'");
  return id;
}

std::string format_event_id(const EventId& id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02d%02d00%02d", id.year, id.month, id.day, id.sequence);
  return buf;
}

// ---------------------------------------------------------------------------

std::int64_t CodedCell::value() const {
  if (!value_) throw LookupError("value of an Unknown cell");
  return *value_;
}

std::string_view sentinel_spelling(FieldKind kind) {
  switch (kind) {
    case FieldKind::kCount:
      return "-99";
    case FieldKind::kTriState:
      return "-9";
    case FieldKind::kDatePart:
      return "0";
    case FieldKind::kCode:
      return "";
  }
  return "";
}

CodedCell decode_coded_numeric(FieldKind kind, std::string_view raw) {
  const std::string_view cell = trim(raw);
  if (cell.empty() || iequals(cell, "Unknown")) return CodedCell::unknown();
  const auto v = parse_int(cell);
  if (!v) throw ParseError("not a number: '" + std::string(raw) + "'");
  const std::string_view sentinel = sentinel_spelling(kind);
  if (!sentinel.empty() && *v == *parse_int(sentinel)) return CodedCell::unknown();
  return CodedCell::known(*v);
}

std::string_view tri_state_label(TriState t) {
  switch (t) {
    case TriState::kYes:
      return "Yes";
    case TriState::kNo:
      return "No";
    case TriState::kUnknown:
      return "Unknown";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------

void CodeTable::add(int code, std::string label) {
  if (!labels_.emplace(code, std::move(label)).second)
    throw ParseError(name_ + ": duplicate code " + std::to_string(code));
}

const std::string& CodeTable::label(int code) const {
  const auto it = labels_.find(code);
  if (it == labels_.end()) throw LookupError("unknown " + name_ + " code " + std::to_string(code));
  return it->second;
}

std::optional<int> CodeTable::find(std::string_view label) const {
  for (const auto& [code, l] : labels_)
    if (l == label) return code;
  return std::nullopt;
}

bool CodeTable::is_unknown(int code) const {
  const auto it = labels_.find(code);
  return it != labels_.end() && it->second == "Unknown";
}

std::string_view watershed_event_name(WatershedEvent e) {
  switch (e) {
    case WatershedEvent::kIndependence:
      return "independence";
    case WatershedEvent::kTermination:
      return "termination";
    case WatershedEvent::kUnification:
      return "unification";
    case WatershedEvent::kRename:
      return "rename";
  }
  return "independence";
}

bool PropertyBand::admits(std::int64_t usd) const {
  if (above && !(usd > *above)) return false;
  if (below && !(usd < *below)) return false;
  return true;
}

// ---------------------------------------------------------------------------

namespace {

struct TsvRow {
  int line = 0;
  std::vector<std::string> cells;
};

std::vector<TsvRow> read_tsv(const std::string& file, const std::string& text, std::size_t min_cols) {
  std::vector<TsvRow> rows;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    TsvRow row{n, split(line, '\t')};
    if (row.cells.size() < min_cols)
      throw ParseError(file + ":" + std::to_string(n) + ": expected " + std::to_string(min_cols) +
                       " tab-separated columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

int cell_int(const std::string& file, const TsvRow& row, std::size_t col) {
  const auto v = parse_int(row.cells[col]);
  if (!v) throw ParseError(file + ":" + std::to_string(row.line) + ": bad integer '" + row.cells[col] + "'");
  return static_cast<int>(*v);
}

const std::string& file_text(const std::map<std::string, std::string>& files, const std::string& name) {
  const auto it = files.find(name);
  if (it == files.end()) throw ParseError("codebook table missing: " + name);
  return it->second;
}

void load_code_table(const std::map<std::string, std::string>& files, const std::string& name, CodeTable& table) {
  for (const auto& row : read_tsv(name, file_text(files, name), 2)) table.add(cell_int(name, row, 0), row.cells[1]);
}

WatershedEvent parse_event(const std::string& file, const TsvRow& row) {
  const std::string& s = row.cells[1];
  if (s == "independence") return WatershedEvent::kIndependence;
  if (s == "termination") return WatershedEvent::kTermination;
  if (s == "unification") return WatershedEvent::kUnification;
  if (s == "rename") return WatershedEvent::kRename;
  throw ParseError(file + ":" + std::to_string(row.line) + ": unknown watershed event '" + s + "'");
}

}  // namespace

CodebookTables CodebookTables::from_files(const std::map<std::string, std::string>& files) {
  CodebookTables t;
  t.version_ = std::string(trim(file_text(files, "VERSION")));
  if (t.version_.empty()) throw ParseError("codebook VERSION is empty");

  load_code_table(files, "countries.tsv", t.countries_);
  load_code_table(files, "regions.tsv", t.regions_);
  load_code_table(files, "attack_types.tsv", t.attack_types_);
  load_code_table(files, "target_types.tsv", t.target_types_);
  load_code_table(files, "entity_types.tsv", t.entity_types_);
  load_code_table(files, "weapon_types.tsv", t.weapon_types_);
  load_code_table(files, "claim_modes.tsv", t.claim_modes_);
  load_code_table(files, "hostage_outcomes.tsv", t.hostage_outcomes_);
  load_code_table(files, "alternatives.tsv", t.alternatives_);

  for (const auto& row : read_tsv("region_members.tsv", file_text(files, "region_members.tsv"), 2)) {
    const int region = cell_int("region_members.tsv", row, 0);
    const int country = cell_int("region_members.tsv", row, 1);
    t.region_members_[region].push_back(country);
    if (!t.country_region_.emplace(country, region).second)
      throw LookupError("country " + std::to_string(country) + " listed in more than one region");
  }

  for (const auto& row : read_tsv("weapon_subtypes.tsv", file_text(files, "weapon_subtypes.tsv"), 3)) {
    const int code = cell_int("weapon_subtypes.tsv", row, 0);
    t.weapon_subtypes_.add(code, row.cells[1]);
    t.subtype_parent_[code] = cell_int("weapon_subtypes.tsv", row, 2);
  }

  for (const auto& row : read_tsv("property_extents.tsv", file_text(files, "property_extents.tsv"), 2)) {
    PropertyBand band;
    band.code = cell_int("property_extents.tsv", row, 0);
    band.name = row.cells[1];
    if (row.cells.size() > 2 && !trim(row.cells[2]).empty()) band.above = parse_int(row.cells[2]);
    if (row.cells.size() > 3 && !trim(row.cells[3]).empty()) band.below = parse_int(row.cells[3]);
    t.property_extents_.add(band.code, band.name);
    t.property_bands_[band.code] = std::move(band);
  }

  for (const auto& row : read_tsv("watersheds.tsv", file_text(files, "watersheds.tsv"), 3)) {
    Watershed w;
    w.country = cell_int("watersheds.tsv", row, 0);
    w.event = parse_event("watersheds.tsv", row);
    w.date = parse_date(row.cells[2]);
    if (row.cells.size() > 3 && !trim(row.cells[3]).empty()) w.counterpart = cell_int("watersheds.tsv", row, 3);
    t.watersheds_.push_back(w);
  }

  t.check_invariants();
  return t;
}

CodebookTables CodebookTables::load(const std::filesystem::path& dir) {
  static const char* kFiles[] = {"VERSION",
                                 "countries.tsv",
                                 "regions.tsv",
                                 "region_members.tsv",
                                 "attack_types.tsv",
                                 "target_types.tsv",
                                 "entity_types.tsv",
                                 "weapon_types.tsv",
                                 "weapon_subtypes.tsv",
                                 "claim_modes.tsv",
                                 "hostage_outcomes.tsv",
                                 "property_extents.tsv",
                                 "alternatives.tsv",
                                 "watersheds.tsv"};
  std::map<std::string, std::string> files;
  for (const char* name : kFiles) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw ParseError("cannot read codebook table " + (dir / name).string());
    std::ostringstream ss;
    ss << in.rdbuf();
    files[name] = ss.str();
  }
  return from_files(files);
}

const CodebookTables& CodebookTables::builtin() {
  static const CodebookTables tables = from_files(detail::embedded_codebook_files());
  return tables;
}

void CodebookTables::check_invariants() const {
  for (const auto& [region, members] : region_members_) {
    if (!regions_.contains(region)) throw LookupError("region_members: unknown region " + std::to_string(region));
    for (int c : members)
      if (!countries_.contains(c))
        throw LookupError("region " + std::to_string(region) + " lists unknown country " + std::to_string(c));
  }
  for (const auto& [sub, parent] : subtype_parent_)
    if (!weapon_types_.contains(parent))
      throw LookupError("weapon subtype " + std::to_string(sub) + " has unknown parent " + std::to_string(parent));
  for (const auto& w : watersheds_) {
    if (!countries_.contains(w.country))
      throw LookupError("watershed for unknown country " + std::to_string(w.country));
    if (w.counterpart && !countries_.contains(*w.counterpart))
      throw LookupError("watershed counterpart unknown: " + std::to_string(*w.counterpart));
  }
}

const std::vector<int>& CodebookTables::region_members(int region) const {
  const auto it = region_members_.find(region);
  if (it == region_members_.end()) throw LookupError("unknown region code " + std::to_string(region));
  return it->second;
}

std::optional<int> CodebookTables::find_region_of_country(int country) const {
  const auto it = country_region_.find(country);
  if (it == country_region_.end()) return std::nullopt;
  return it->second;
}

int CodebookTables::region_of_country(int country) const {
  if (!countries_.contains(country)) throw LookupError("unknown country code " + std::to_string(country));
  const auto region = find_region_of_country(country);
  if (!region)
    throw LookupError("country " + std::to_string(country) + " (" + countries_.label(country) +
                      ") belongs to no region");
  return *region;
}

ValidityWindow CodebookTables::country_validity_window(int country) const {
  if (!countries_.contains(country)) throw LookupError("unknown country code " + std::to_string(country));
  ValidityWindow w;
  for (const auto& ws : watersheds_) {
    if (ws.country != country) continue;
    if (ws.event == WatershedEvent::kTermination) {
      if (!w.until || ws.date < *w.until) {
        w.until = ws.date;
        w.after_suggestion = ws.counterpart;
      }
    } else if (!w.from || ws.date > *w.from) {
      w.from = ws.date;
      w.before_suggestion = ws.counterpart;
    }
  }
  return w;
}

CountryVerdict CodebookTables::country_validity_at_date(int country, const Date& date) const {
  if (!date.ok()) throw ParseError("not a calendar date");
  const ValidityWindow w = country_validity_window(country);
  if (w.from && date < *w.from) return {CountryVerdict::Kind::kAnachronism, w.before_suggestion};
  if (w.until && date >= *w.until) return {CountryVerdict::Kind::kAnachronism, w.after_suggestion};
  return {};
}

int CodebookTables::weapon_subtype_parent(int subtype) const {
  const auto it = subtype_parent_.find(subtype);
  if (it == subtype_parent_.end()) throw LookupError("unknown weapon subtype " + std::to_string(subtype));
  return it->second;
}

const PropertyBand& CodebookTables::property_band(int propextent) const {
  const auto it = property_bands_.find(propextent);
  if (it == property_bands_.end()) throw LookupError("unknown propextent " + std::to_string(propextent));
  return it->second;
}

}  // namespace incube
