#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "incube/codebook.hpp"

namespace incube {

// ---------------------------------------------------------------------------
// Delimited input.

class Header {
 public:
  // Throws ParseError on duplicate column names.
  explicit Header(std::vector<std::string> names);

  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct RawRecord {
  std::shared_ptr<const Header> header;
  std::vector<std::string> cells;
  std::size_t line = 0;

  // nullopt when the column is absent from the header.
  std::optional<std::string_view> get(std::string_view column) const;
};

struct Diagnostic {
  std::string rule;  // "P1" ragged row, "P2" unbalanced quote
  std::size_t line = 0;
  std::string message;
};

struct DelimitedFile {
  std::shared_ptr<const Header> header;
  std::vector<RawRecord> records;
  std::vector<Diagnostic> diagnostics;
};

// Header name -> canonical column name, e.g. "iyear" -> "year".
using HeaderAliases = std::map<std::string, std::string>;

// Two columns per line (tab or comma separated): alias, canonical name.
HeaderAliases load_alias_map(std::istream& in);

// Standard double-quote rules: quoted cells may hold the delimiter, line
// breaks and doubled quotes. Ragged rows and rows with an unterminated quote
// are skipped with a diagnostic. Throws ParseError when the header row is
// missing or has duplicate names.
DelimitedFile parse_delimited(std::istream& in, char delimiter = ',', const HeaderAliases* aliases = nullptr);

// ---------------------------------------------------------------------------
// Incidents.

using Code = std::optional<int>;

struct Incident {
  EventId eventid;
  CodedCell year, month, day;
  std::string approxdate;
  TriState extended = TriState::kUnknown;
  std::optional<Date> resolution;

  Code country, region;
  std::string provstate, city, location;
  TriState vicinity = TriState::kUnknown;
  std::string summary;

  TriState crit1 = TriState::kUnknown;
  TriState crit2 = TriState::kUnknown;
  TriState crit3 = TriState::kUnknown;
  TriState doubtterr = TriState::kUnknown;
  Code alternative;
  TriState multiple = TriState::kUnknown;
  TriState conflict = TriState::kUnknown;

  TriState success = TriState::kUnknown;
  TriState suicide = TriState::kUnknown;
  std::array<Code, 3> attacktype;

  std::array<Code, 3> targtype, entity, natlty;
  std::array<std::string, 3> corp, target;

  std::array<std::string, 3> gname, gsubname;
  std::string motive;
  TriState guncertain = TriState::kUnknown;
  CodedCell nperps, nperpcap;

  // Slot 0 is claimed/claimmode/claimconf, slots 1-2 the second and third group.
  std::array<TriState, 3> claimed{TriState::kUnknown, TriState::kUnknown, TriState::kUnknown};
  std::array<Code, 3> claimmode;
  std::array<TriState, 3> claimconf{TriState::kUnknown, TriState::kUnknown, TriState::kUnknown};
  TriState compclaim = TriState::kUnknown;

  std::array<Code, 4> weaptype, weapsubtype;
  std::string weapdetail;

  CodedCell nkill, nkillus, nkillter, nwound, nwoundus, nwoundte;

  TriState property = TriState::kUnknown;
  Code propextent;
  CodedCell propvalue;
  std::string propcomment;

  TriState ishostkid = TriState::kUnknown;
  CodedCell nhostkid, nhostkidus, nhours, ndays;
  std::string divert, kidhijcountry;
  TriState ransom = TriState::kUnknown;
  CodedCell ransomamt, ransomamtus, ransompaid, ransompaidus;
  std::string ransomnote;
  Code hostkidoutcome;
  CodedCell nreleased;

  std::string addnotes;
  std::array<std::string, 3> scite;

  // Columns outside the codebook, kept verbatim.
  std::map<std::string, std::string> extras;

  bool operator==(const Incident&) const = default;
};

// Canonical column order used when writing incidents.
const std::vector<std::string>& incident_columns();

// ---------------------------------------------------------------------------
// Violations.

enum class Severity { kError, kWarning };
std::string_view severity_name(Severity s);

// Rule ids:
//   P1 ragged row, P2 unbalanced quote (parse level, row skipped)
//   R0 malformed eventid
//   R1 resolution present but extended is not Yes
//   R2 weapon subtype does not belong to its slot's weapon type
//   R3 nhours >= 24, or both nhours and ndays known
//   R4 region does not match the country's region
//   R5 country code not valid at the incident date (warning)
//   R6 propvalue outside the propextent band (warning)
//   R7 multi-slot field filled with a gap (slot n set, slot n-1 empty)
//   R8 hostage outcome / released count without a hostage incident (warning)
//   R9 date part known below an unknown part (day without month, month without year)
//   R10 malformed numeric cell
//   R11 code outside its codebook domain
//   R12 date parts do not form a calendar date
//   R13 alternative designation while doubtterr is not Yes (warning)
struct Violation {
  std::string rule;
  Severity severity = Severity::kError;
  std::vector<std::string> fields;
  std::string message;
  std::size_t line = 0;
  std::string eventid;

  bool operator==(const Violation&) const = default;
};

struct DecodedRecord {
  Incident incident;
  std::vector<Violation> violations;
  std::size_t line = 0;
};

// Total: never throws for any record. Required columns (eventid, year, month,
// day, country, region) are checked once per file by ingest_stream.
DecodedRecord decode_record(const RawRecord& raw, const CodebookTables& tables);

std::vector<Violation> validate_incident(const Incident& inc, const CodebookTables& tables, std::size_t line = 0);

bool has_errors(std::span<const Violation> violations);

// Columns rule,severity,line,eventid,fields,message.
void write_violation_report(std::ostream& out, std::span<const Violation> violations, char delimiter = ',');

// ---------------------------------------------------------------------------
// Pipelines.

struct IngestResult {
  std::vector<Incident> accepted;  // records with no Error-severity violation
  std::vector<std::size_t> accepted_lines;
  std::vector<Violation> violations;  // every violation, in line order
  std::size_t records = 0;
};

IngestResult ingest_stream(std::istream& in, const CodebookTables& tables, char delimiter = ',',
                           const HeaderAliases* aliases = nullptr);

void write_incidents(std::ostream& out, std::span<const Incident> incidents, char delimiter = ',');

// Splits a cumulative casualty figure evenly across linked incidents, which
// must be listed earliest first. The first (total mod n) incidents receive one
// extra. Throws Error for an empty list.
std::vector<CodedCell> distribute_casualties(std::span<const EventId> linked, const CodedCell& total);

}  // namespace incube
