#include "incube/ingest.hpp"

#include <algorithm>
#include <iterator>
#include <set>
#include <sstream>
#include <variant>

#include "incube/error.hpp"
#include "incube/strings.hpp"

namespace incube {

// ---------------------------------------------------------------------------
// Delimited parsing.

Header::Header(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) throw ParseError("duplicate column name in header: '" + names_[i] + "'");
  }
}

std::optional<std::size_t> Header::index_of(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string_view> RawRecord::get(std::string_view column) const {
  const auto idx = header->index_of(column);
  if (!idx || *idx >= cells.size()) return std::nullopt;
  return std::string_view(cells[*idx]);
}

HeaderAliases load_alias_map(std::istream& in) {
  HeaderAliases aliases;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    const char sep = l.find('\t') != std::string_view::npos ? '\t' : ',';
    const auto parts = split(l, sep);
    if (parts.size() != 2)
      throw ParseError("alias map line " + std::to_string(n) + ": expected 'alias" + sep + "column'");
    aliases[std::string(trim(parts[0]))] = std::string(trim(parts[1]));
  }
  return aliases;
}

namespace {

struct Row {
  std::vector<std::string> cells;
  std::size_t line = 0;
  bool malformed_quote = false;
};

// Splits the whole input into rows of cells. A row with a quote problem is
// flagged and its remaining text up to the end of the physical line dropped.
class RowReader {
 public:
  RowReader(std::string text, char delimiter) : text_(std::move(text)), delim_(delimiter) {
    if (text_.rfind("\xEF\xBB\xBF", 0) == 0) pos_ = 3;
  }

  bool next(Row& row) {
    row = Row{};
    // Skip blank physical lines.
    while (pos_ < text_.size() && (text_[pos_] == '\n' || text_[pos_] == '\r')) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return false;
    row.line = line_;
    std::string cell;
    for (;;) {
      if (pos_ >= text_.size()) {
        row.cells.push_back(std::move(cell));
        return true;
      }
      char c = text_[pos_];
      if (c == '"' && cell.empty()) {
        if (!read_quoted(cell)) {
          row.malformed_quote = true;
          skip_rest_of_line();
          return true;
        }
        continue;
      }
      if (c == delim_) {
        row.cells.push_back(std::move(cell));
        cell.clear();
        ++pos_;
        continue;
      }
      if (c == '\r' || c == '\n') {
        row.cells.push_back(std::move(cell));
        if (c == '\r') ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        ++line_;
        return true;
      }
      cell.push_back(c);
      ++pos_;
    }
  }

 private:
  // Reads a quoted cell starting at the opening quote. Afterwards the cursor
  // sits on the delimiter / line break that ends the cell.
  bool read_quoted(std::string& cell) {
    ++pos_;
    for (;;) {
      if (pos_ >= text_.size()) return false;
      const char c = text_[pos_];
      if (c == '"') {
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
          cell.push_back('"');
          pos_ += 2;
          continue;
        }
        ++pos_;
        if (pos_ >= text_.size()) return true;
        const char after = text_[pos_];
        return after == delim_ || after == '\r' || after == '\n';
      }
      if (c == '\n') ++line_;
      cell.push_back(c);
      ++pos_;
    }
  }

  void skip_rest_of_line() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    if (pos_ < text_.size()) {
      ++pos_;
      ++line_;
    }
  }

  std::string text_;
  char delim_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

DelimitedFile parse_delimited(std::istream& in, char delimiter, const HeaderAliases* aliases) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  RowReader reader(std::move(text), delimiter);
  DelimitedFile file;

  Row row;
  if (!reader.next(row)) throw ParseError("input has no header row");
  if (row.malformed_quote) throw ParseError("header row has an unbalanced quote");
  std::vector<std::string> names;
  names.reserve(row.cells.size());
  for (auto& c : row.cells) {
    std::string name(trim(c));
    if (aliases) {
      if (const auto it = aliases->find(name); it != aliases->end()) name = it->second;
    }
    names.push_back(std::move(name));
  }
  file.header = std::make_shared<const Header>(std::move(names));

  while (reader.next(row)) {
    if (row.malformed_quote) {
      file.diagnostics.push_back({"P2", row.line, "unbalanced or misplaced quote; row skipped"});
      continue;
    }
    if (row.cells.size() != file.header->size()) {
      file.diagnostics.push_back({"P1", row.line,
                                  "row has " + std::to_string(row.cells.size()) + " cells, header has " +
                                      std::to_string(file.header->size()) + "; row skipped"});
      continue;
    }
    file.records.push_back(RawRecord{file.header, std::move(row.cells), row.line});
  }
  return file;
}

// ---------------------------------------------------------------------------
// Column schema.

namespace {

enum class ColKind { kEventId, kDatePart, kCount, kTri, kCode, kText, kDate };

enum class Domain {
  kNone,
  kCountry,
  kRegion,
  kAttack,
  kTarget,
  kEntity,
  kWeapon,
  kWeaponSub,
  kClaimMode,
  kHostageOutcome,
  kPropExtent,
  kAlternative,
};

using FieldRef = std::variant<EventId*, CodedCell*, TriState*, Code*, std::string*, std::optional<Date>*>;

struct ColumnSpec {
  std::string_view name;
  ColKind kind;
  Domain domain;
  FieldRef (*ref)(Incident&);
};

#define INCUBE_COL(name, kind, domain, member)                                             \
  ColumnSpec {                                                                             \
    name, ColKind::kind, Domain::domain, [](Incident& i) -> FieldRef { return &i.member; } \
  }

const std::vector<ColumnSpec>& schema() {
  static const std::vector<ColumnSpec> cols = {
      INCUBE_COL("eventid", kEventId, kNone, eventid),
      INCUBE_COL("year", kDatePart, kNone, year),
      INCUBE_COL("month", kDatePart, kNone, month),
      INCUBE_COL("day", kDatePart, kNone, day),
      INCUBE_COL("approxdate", kText, kNone, approxdate),
      INCUBE_COL("extended", kTri, kNone, extended),
      INCUBE_COL("resolution", kDate, kNone, resolution),
      INCUBE_COL("country", kCode, kCountry, country),
      INCUBE_COL("region", kCode, kRegion, region),
      INCUBE_COL("provstate", kText, kNone, provstate),
      INCUBE_COL("city", kText, kNone, city),
      INCUBE_COL("vicinity", kTri, kNone, vicinity),
      INCUBE_COL("location", kText, kNone, location),
      INCUBE_COL("summary", kText, kNone, summary),
      INCUBE_COL("crit1", kTri, kNone, crit1),
      INCUBE_COL("crit2", kTri, kNone, crit2),
      INCUBE_COL("crit3", kTri, kNone, crit3),
      INCUBE_COL("doubtterr", kTri, kNone, doubtterr),
      INCUBE_COL("alternative", kCode, kAlternative, alternative),
      INCUBE_COL("multiple", kTri, kNone, multiple),
      INCUBE_COL("conflict", kTri, kNone, conflict),
      INCUBE_COL("success", kTri, kNone, success),
      INCUBE_COL("suicide", kTri, kNone, suicide),
      INCUBE_COL("attacktype1", kCode, kAttack, attacktype[0]),
      INCUBE_COL("attacktype2", kCode, kAttack, attacktype[1]),
      INCUBE_COL("attacktype3", kCode, kAttack, attacktype[2]),
      INCUBE_COL("targtype1", kCode, kTarget, targtype[0]),
      INCUBE_COL("entity1", kCode, kEntity, entity[0]),
      INCUBE_COL("corp1", kText, kNone, corp[0]),
      INCUBE_COL("target1", kText, kNone, target[0]),
      INCUBE_COL("natlty1", kCode, kCountry, natlty[0]),
      INCUBE_COL("targtype2", kCode, kTarget, targtype[1]),
      INCUBE_COL("entity2", kCode, kEntity, entity[1]),
      INCUBE_COL("corp2", kText, kNone, corp[1]),
      INCUBE_COL("target2", kText, kNone, target[1]),
      INCUBE_COL("natlty2", kCode, kCountry, natlty[1]),
      INCUBE_COL("targtype3", kCode, kTarget, targtype[2]),
      INCUBE_COL("entity3", kCode, kEntity, entity[2]),
      INCUBE_COL("corp3", kText, kNone, corp[2]),
      INCUBE_COL("target3", kText, kNone, target[2]),
      INCUBE_COL("natlty3", kCode, kCountry, natlty[2]),
      INCUBE_COL("gname", kText, kNone, gname[0]),
      INCUBE_COL("gsubname", kText, kNone, gsubname[0]),
      INCUBE_COL("gname2", kText, kNone, gname[1]),
      INCUBE_COL("gsubname2", kText, kNone, gsubname[1]),
      INCUBE_COL("gname3", kText, kNone, gname[2]),
      INCUBE_COL("gsubname3", kText, kNone, gsubname[2]),
      INCUBE_COL("motive", kText, kNone, motive),
      INCUBE_COL("guncertain", kTri, kNone, guncertain),
      INCUBE_COL("nperps", kCount, kNone, nperps),
      INCUBE_COL("nperpcap", kCount, kNone, nperpcap),
      INCUBE_COL("claimed", kTri, kNone, claimed[0]),
      INCUBE_COL("claimmode", kCode, kClaimMode, claimmode[0]),
      INCUBE_COL("claimconf", kTri, kNone, claimconf[0]),
      INCUBE_COL("claim2", kTri, kNone, claimed[1]),
      INCUBE_COL("claimmode2", kCode, kClaimMode, claimmode[1]),
      INCUBE_COL("claimconf2", kTri, kNone, claimconf[1]),
      INCUBE_COL("claim3", kTri, kNone, claimed[2]),
      INCUBE_COL("claimmode3", kCode, kClaimMode, claimmode[2]),
      INCUBE_COL("claimconf3", kTri, kNone, claimconf[2]),
      INCUBE_COL("compclaim", kTri, kNone, compclaim),
      INCUBE_COL("weaptype1", kCode, kWeapon, weaptype[0]),
      INCUBE_COL("weapsubtype1", kCode, kWeaponSub, weapsubtype[0]),
      INCUBE_COL("weaptype2", kCode, kWeapon, weaptype[1]),
      INCUBE_COL("weapsubtype2", kCode, kWeaponSub, weapsubtype[1]),
      INCUBE_COL("weaptype3", kCode, kWeapon, weaptype[2]),
      INCUBE_COL("weapsubtype3", kCode, kWeaponSub, weapsubtype[2]),
      INCUBE_COL("weaptype4", kCode, kWeapon, weaptype[3]),
      INCUBE_COL("weapsubtype4", kCode, kWeaponSub, weapsubtype[3]),
      INCUBE_COL("weapdetail", kText, kNone, weapdetail),
      INCUBE_COL("nkill", kCount, kNone, nkill),
      INCUBE_COL("nkillus", kCount, kNone, nkillus),
      INCUBE_COL("nkillter", kCount, kNone, nkillter),
      INCUBE_COL("nwound", kCount, kNone, nwound),
      INCUBE_COL("nwoundus", kCount, kNone, nwoundus),
      INCUBE_COL("nwoundte", kCount, kNone, nwoundte),
      INCUBE_COL("property", kTri, kNone, property),
      INCUBE_COL("propextent", kCode, kPropExtent, propextent),
      INCUBE_COL("propvalue", kCount, kNone, propvalue),
      INCUBE_COL("propcomment", kText, kNone, propcomment),
      INCUBE_COL("ishostkid", kTri, kNone, ishostkid),
      INCUBE_COL("nhostkid", kCount, kNone, nhostkid),
      INCUBE_COL("nhostkidus", kCount, kNone, nhostkidus),
      INCUBE_COL("nhours", kCount, kNone, nhours),
      INCUBE_COL("ndays", kCount, kNone, ndays),
      INCUBE_COL("divert", kText, kNone, divert),
      INCUBE_COL("kidhijcountry", kText, kNone, kidhijcountry),
      INCUBE_COL("ransom", kTri, kNone, ransom),
      INCUBE_COL("ransomamt", kCount, kNone, ransomamt),
      INCUBE_COL("ransomamtus", kCount, kNone, ransomamtus),
      INCUBE_COL("ransompaid", kCount, kNone, ransompaid),
      INCUBE_COL("ransompaidus", kCount, kNone, ransompaidus),
      INCUBE_COL("ransomnote", kText, kNone, ransomnote),
      INCUBE_COL("hostkidoutcome", kCode, kHostageOutcome, hostkidoutcome),
      INCUBE_COL("nreleased", kCount, kNone, nreleased),
      INCUBE_COL("addnotes", kText, kNone, addnotes),
      INCUBE_COL("scite1", kText, kNone, scite[0]),
      INCUBE_COL("scite2", kText, kNone, scite[1]),
      INCUBE_COL("scite3", kText, kNone, scite[2]),
  };
  return cols;
}

#undef INCUBE_COL

const CodeTable* domain_table(Domain d, const CodebookTables& t) {
  switch (d) {
    case Domain::kNone:
      return nullptr;
    case Domain::kCountry:
      return &t.countries();
    case Domain::kRegion:
      return &t.regions();
    case Domain::kAttack:
      return &t.attack_types();
    case Domain::kTarget:
      return &t.target_types();
    case Domain::kEntity:
      return &t.entity_types();
    case Domain::kWeapon:
      return &t.weapon_types();
    case Domain::kWeaponSub:
      return &t.weapon_subtypes();
    case Domain::kClaimMode:
      return &t.claim_modes();
    case Domain::kHostageOutcome:
      return &t.hostage_outcomes();
    case Domain::kPropExtent:
      return &t.property_extents();
    case Domain::kAlternative:
      return &t.alternatives();
  }
  return nullptr;
}

std::string encode_cell(const ColumnSpec& col, const Incident& inc) {
  // Read-only use of the shared accessor.
  const FieldRef ref = col.ref(const_cast<Incident&>(inc));
  switch (col.kind) {
    case ColKind::kEventId:
      return format_event_id(*std::get<EventId*>(ref));
    case ColKind::kDatePart:
    case ColKind::kCount: {
      const CodedCell& c = *std::get<CodedCell*>(ref);
      if (c.is_known()) return std::to_string(c.value());
      return std::string(sentinel_spelling(col.kind == ColKind::kCount ? FieldKind::kCount : FieldKind::kDatePart));
    }
    case ColKind::kTri:
      return std::to_string(static_cast<int>(*std::get<TriState*>(ref)));
    case ColKind::kCode: {
      const Code& c = *std::get<Code*>(ref);
      return c ? std::to_string(*c) : std::string();
    }
    case ColKind::kText:
      return *std::get<std::string*>(ref);
    case ColKind::kDate: {
      const auto& d = *std::get<std::optional<Date>*>(ref);
      return d ? format_date(*d) : std::string();
    }
  }
  return {};
}

std::string slot_name(std::string_view base, std::size_t slot) { return std::string(base) + std::to_string(slot + 1); }

}  // namespace

const std::vector<std::string>& incident_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : schema()) out.emplace_back(c.name);
    return out;
  }();
  return names;
}

std::string_view severity_name(Severity s) { return s == Severity::kError ? "Error" : "Warning"; }

bool has_errors(std::span<const Violation> violations) {
  return std::any_of(violations.begin(), violations.end(),
                     [](const Violation& v) { return v.severity == Severity::kError; });
}

// ---------------------------------------------------------------------------
// Decoding.

DecodedRecord decode_record(const RawRecord& raw, const CodebookTables& tables) {
  DecodedRecord out;
  out.line = raw.line;
  Incident& inc = out.incident;
  const std::string eventid_text(raw.get("eventid").value_or(""));

  auto flag = [&](std::string rule, Severity sev, std::string field, std::string msg) {
    out.violations.push_back({std::move(rule), sev, {std::move(field)}, std::move(msg), raw.line, eventid_text});
  };

  for (const auto& col : schema()) {
    const auto cell = raw.get(col.name);
    if (!cell) continue;
    const FieldRef ref = col.ref(inc);
    const std::string field(col.name);
    try {
      switch (col.kind) {
        case ColKind::kEventId:
          try {
            inc.eventid = parse_event_id(trim(*cell));
          } catch (const ParseError& e) {
            flag("R0", Severity::kError, field, e.what());
          }
          break;
        case ColKind::kDatePart:
        case ColKind::kCount: {
          const CodedCell c =
              decode_coded_numeric(col.kind == ColKind::kCount ? FieldKind::kCount : FieldKind::kDatePart, *cell);
          if (col.kind == ColKind::kCount && c.is_known() && c.value() < 0) {
            flag("R10", Severity::kError, field, "negative value " + std::to_string(c.value()));
            break;
          }
          *std::get<CodedCell*>(ref) = c;
          break;
        }
        case ColKind::kTri: {
          const CodedCell c = decode_coded_numeric(FieldKind::kTriState, *cell);
          if (!c.is_known()) {
            *std::get<TriState*>(ref) = TriState::kUnknown;
          } else if (c.value() == 0 || c.value() == 1) {
            *std::get<TriState*>(ref) = c.value() ? TriState::kYes : TriState::kNo;
          } else {
            flag("R11", Severity::kError, field, "tri-state value " + std::to_string(c.value()) + " not in {1,0,-9}");
          }
          break;
        }
        case ColKind::kCode: {
          const CodedCell c = decode_coded_numeric(FieldKind::kCode, *cell);
          if (!c.is_known()) break;
          const int code = static_cast<int>(c.value());
          *std::get<Code*>(ref) = code;
          if (const CodeTable* table = domain_table(col.domain, tables); table && !table->contains(code))
            flag("R11", Severity::kError, field,
                 "code " + std::to_string(code) + " not in " + table->name() + " table");
          break;
        }
        case ColKind::kText:
          *std::get<std::string*>(ref) = std::string(*cell);
          break;
        case ColKind::kDate:
          if (!trim(*cell).empty()) *std::get<std::optional<Date>*>(ref) = parse_date(*cell);
          break;
      }
    } catch (const ParseError& e) {
      flag("R10", Severity::kError, field, e.what());
    }
  }

  const auto& names = raw.header->names();
  for (std::size_t i = 0; i < names.size() && i < raw.cells.size(); ++i) {
    if (raw.cells[i].empty()) continue;
    const bool known =
        std::any_of(schema().begin(), schema().end(), [&](const ColumnSpec& c) { return c.name == names[i]; });
    if (!known) inc.extras[names[i]] = raw.cells[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation.

namespace {

using namespace std::chrono;

// Earliest and latest calendar dates compatible with the known date parts.
std::optional<std::pair<Date, Date>> date_range(const Incident& inc) {
  if (!inc.year.is_known()) return std::nullopt;
  const year y{static_cast<int>(inc.year.value())};
  if (!inc.month.is_known()) return std::pair{Date{y, January, day{1}}, Date{y, December, day{31}}};
  const month m{static_cast<unsigned>(inc.month.value())};
  if (!m.ok()) return std::nullopt;
  if (!inc.day.is_known()) {
    const year_month_day_last last{y, month_day_last{m}};
    return std::pair{Date{y, m, day{1}}, Date{last}};
  }
  const Date d{y, m, day{static_cast<unsigned>(inc.day.value())}};
  if (!d.ok()) return std::nullopt;
  return std::pair{d, d};
}

}  // namespace

std::vector<Violation> validate_incident(const Incident& inc, const CodebookTables& tables, std::size_t line) {
  std::vector<Violation> out;
  const std::string eid = format_event_id(inc.eventid);
  auto flag = [&](const char* rule, Severity sev, std::vector<std::string> fields, std::string msg) {
    out.push_back({rule, sev, std::move(fields), std::move(msg), line, eid});
  };

  // R1
  if (inc.resolution && inc.extended != TriState::kYes)
    flag("R1", Severity::kError, {"resolution", "extended"},
         "resolution date " + format_date(*inc.resolution) + " given but extended is " +
             std::string(tri_state_label(inc.extended)));

  // R2
  for (std::size_t k = 0; k < inc.weapsubtype.size(); ++k) {
    const Code& sub = inc.weapsubtype[k];
    if (!sub || !tables.weapon_subtypes().contains(*sub)) continue;
    const int parent = tables.weapon_subtype_parent(*sub);
    if (inc.weaptype[k] != parent)
      flag("R2", Severity::kError, {slot_name("weapsubtype", k), slot_name("weaptype", k)},
           "subtype " + std::to_string(*sub) + " (" + tables.weapon_subtypes().label(*sub) +
               ") belongs to weapon type " + std::to_string(parent) + ", slot has " +
               (inc.weaptype[k] ? std::to_string(*inc.weaptype[k]) : std::string("none")));
  }

  // R3
  if (inc.nhours.is_known() && inc.nhours.value() >= 24)
    flag("R3", Severity::kError, {"nhours"},
         "nhours " + std::to_string(inc.nhours.value()) + " must be below 24; use ndays");
  if (inc.nhours.is_known() && inc.ndays.is_known())
    flag("R3", Severity::kError, {"nhours", "ndays"}, "both nhours and ndays are known");

  // R4
  if (!inc.country) {
    flag("R4", Severity::kError, {"country", "region"}, "country is missing");
  } else {
    const auto expected = tables.find_region_of_country(*inc.country);
    if (!tables.countries().contains(*inc.country)) {
      flag("R4", Severity::kError, {"country", "region"},
           "country " + std::to_string(*inc.country) + " is not a known code");
    } else if (!expected) {
      flag("R4", Severity::kError, {"country", "region"},
           "country " + std::to_string(*inc.country) + " (" + tables.countries().label(*inc.country) +
               ") belongs to no region");
    } else if (inc.region != *expected) {
      flag("R4", Severity::kError, {"country", "region"},
           "region " + (inc.region ? std::to_string(*inc.region) : std::string("missing")) + " but country " +
               std::to_string(*inc.country) + " lies in region " + std::to_string(*expected));
    }
  }

  // R5
  if (inc.country && tables.countries().contains(*inc.country)) {
    if (const auto range = date_range(inc)) {
      const ValidityWindow w = tables.country_validity_window(*inc.country);
      std::optional<int> suggestion;
      bool anachronism = false;
      if (w.from && range->second < *w.from) {
        anachronism = true;
        suggestion = w.before_suggestion;
      } else if (w.until && range->first >= *w.until) {
        anachronism = true;
        suggestion = w.after_suggestion;
      }
      if (anachronism)
        flag("R5", Severity::kWarning, {"country", "year", "month", "day"},
             "country " + std::to_string(*inc.country) + " (" + tables.countries().label(*inc.country) +
                 ") is not valid at the incident date" +
                 (suggestion
                      ? "; expected " + std::to_string(*suggestion) + " (" + tables.countries().label(*suggestion) + ")"
                      : std::string()));
    }
  }

  // R6
  if (inc.propvalue.is_known() && inc.propextent && tables.property_extents().contains(*inc.propextent)) {
    const PropertyBand& band = tables.property_band(*inc.propextent);
    if (!band.admits(inc.propvalue.value()))
      flag("R6", Severity::kWarning, {"propvalue", "propextent"},
           "propvalue " + std::to_string(inc.propvalue.value()) + " outside the " + band.name + " band");
  }

  // R7
  auto check_slots = [&](const auto& slots, std::string_view base) {
    for (std::size_t k = 1; k < slots.size(); ++k)
      if (slots[k] && !slots[k - 1])
        flag("R7", Severity::kError, {slot_name(base, k), slot_name(base, k - 1)},
             slot_name(base, k) + " is set but " + slot_name(base, k - 1) + " is empty");
  };
  check_slots(inc.attacktype, "attacktype");
  check_slots(inc.targtype, "targtype");
  check_slots(inc.weaptype, "weaptype");

  // R8
  if (inc.ishostkid == TriState::kNo) {
    if (inc.hostkidoutcome)
      flag("R8", Severity::kWarning, {"hostkidoutcome", "ishostkid"}, "hostage outcome given but ishostkid is No");
    if (inc.nreleased.is_known())
      flag("R8", Severity::kWarning, {"nreleased", "ishostkid"}, "nreleased given but ishostkid is No");
  }

  // R9
  if (inc.day.is_known() && !inc.month.is_known())
    flag("R9", Severity::kError, {"day", "month"}, "day is known but month is unknown");
  if (inc.month.is_known() && !inc.year.is_known())
    flag("R9", Severity::kError, {"month", "year"}, "month is known but year is unknown");

  // R12
  if (inc.year.is_known() && (inc.year.value() < 1970 || inc.year.value() > 2100))
    flag("R12", Severity::kError, {"year"}, "year " + std::to_string(inc.year.value()) + " outside 1970-2100");
  if (inc.month.is_known() && (inc.month.value() < 1 || inc.month.value() > 12))
    flag("R12", Severity::kError, {"month"}, "month " + std::to_string(inc.month.value()) + " outside 1-12");
  if (inc.day.is_known() && (inc.day.value() < 1 || inc.day.value() > 31))
    flag("R12", Severity::kError, {"day"}, "day " + std::to_string(inc.day.value()) + " outside 1-31");
  else if (inc.year.is_known() && inc.month.is_known() && inc.day.is_known() && inc.month.value() >= 1 &&
           inc.month.value() <= 12) {
    const Date d{year{static_cast<int>(inc.year.value())}, month{static_cast<unsigned>(inc.month.value())},
                 day{static_cast<unsigned>(inc.day.value())}};
    if (!d.ok()) flag("R12", Severity::kError, {"year", "month", "day"}, "date parts do not form a calendar date");
  }

  // R13
  if (inc.alternative && inc.doubtterr != TriState::kYes)
    flag("R13", Severity::kWarning, {"alternative", "doubtterr"}, "alternative designation requires doubtterr Yes");

  return out;
}

void write_violation_report(std::ostream& out, std::span<const Violation> violations, char delimiter) {
  out << format_row({"rule", "severity", "line", "eventid", "fields", "message"}, delimiter) << '\n';
  for (const auto& v : violations)
    out << format_row({v.rule, std::string(severity_name(v.severity)), std::to_string(v.line), v.eventid,
                       join(v.fields, ";"), v.message},
                      delimiter)
        << '\n';
}

// ---------------------------------------------------------------------------
// Pipelines.

IngestResult ingest_stream(std::istream& in, const CodebookTables& tables, char delimiter,
                           const HeaderAliases* aliases) {
  DelimitedFile file = parse_delimited(in, delimiter, aliases);
  std::vector<std::string> missing;
  for (const char* required : {"eventid", "year", "month", "day", "country", "region"})
    if (!file.header->index_of(required)) missing.emplace_back(required);
  if (!missing.empty()) throw ParseError("header lacks required columns: " + join(missing, ", "));

  IngestResult result;
  result.records = file.records.size();
  for (const auto& d : file.diagnostics)
    result.violations.push_back({d.rule, Severity::kError, {}, d.message, d.line, ""});

  for (const auto& raw : file.records) {
    DecodedRecord rec = decode_record(raw, tables);
    auto checks = validate_incident(rec.incident, tables, raw.line);
    // A malformed eventid leaves a placeholder id; report the raw text instead.
    for (auto& v : checks) v.eventid = std::string(raw.get("eventid").value_or(""));
    rec.violations.insert(rec.violations.end(), checks.begin(), checks.end());
    if (!has_errors(rec.violations)) {
      result.accepted.push_back(std::move(rec.incident));
      result.accepted_lines.push_back(raw.line);
    }
    result.violations.insert(result.violations.end(), rec.violations.begin(), rec.violations.end());
  }
  std::stable_sort(result.violations.begin(), result.violations.end(),
                   [](const Violation& a, const Violation& b) { return a.line < b.line; });
  return result;
}

void write_incidents(std::ostream& out, std::span<const Incident> incidents, char delimiter) {
  std::set<std::string> extra_cols;
  for (const auto& inc : incidents)
    for (const auto& [k, v] : inc.extras) extra_cols.insert(k);
  std::vector<std::string> header = incident_columns();
  header.insert(header.end(), extra_cols.begin(), extra_cols.end());
  out << format_row(header, delimiter) << '\n';

  std::vector<std::string> cells;
  for (const auto& inc : incidents) {
    cells.clear();
    for (const auto& col : schema()) cells.push_back(encode_cell(col, inc));
    for (const auto& k : extra_cols) {
      const auto it = inc.extras.find(k);
      cells.push_back(it == inc.extras.end() ? std::string() : it->second);
    }
    out << format_row(cells, delimiter) << '\n';
  }
}

std::vector<CodedCell> distribute_casualties(std::span<const EventId> linked, const CodedCell& total) {
  if (linked.empty()) throw Error("distribute_casualties: no linked incidents");
  const auto n = static_cast<std::int64_t>(linked.size());
  if (!total.is_known()) return std::vector<CodedCell>(linked.size(), CodedCell::unknown());
  if (total.value() < 0) throw Error("distribute_casualties: negative total");
  const std::int64_t base = total.value() / n;
  const std::int64_t extra = total.value() % n;
  std::vector<CodedCell> out;
  out.reserve(linked.size());
  for (std::int64_t i = 0; i < n; ++i) out.push_back(CodedCell::known(base + (i < extra ? 1 : 0)));
  return out;
}

}  // namespace incube
