#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <set>

#include "doctest.h"
#include "incube/codebook.hpp"
#include "incube/error.hpp"
#include "region_lists.hpp"

using namespace incube;
using namespace std::chrono;

namespace {

const CodebookTables& tables() { return CodebookTables::builtin(); }

Date ymd(int y, unsigned m, unsigned d) { return Date{year{y}, month{m}, day{d}}; }

int country(const char* name) {
  const auto code = tables().countries().find(name);
  REQUIRE_MESSAGE(code.has_value(), name);
  return *code;
}

}  // namespace

TEST_CASE("event ids decode to date and case number") {
  const EventId a = parse_event_id("199307250001");
  CHECK(a.year == 1993);
  CHECK(a.month == 7);
  CHECK(a.day == 25);
  CHECK(a.sequence == 1);
  CHECK(a.date() == ymd(1993, 7, 25));
  const EventId b = parse_event_id("199307250002");
  CHECK(b.sequence == 2);
  CHECK(a < b);
  CHECK(format_event_id(a) == "199307250001");
}

TEST_CASE("malformed event ids are rejected") {
  for (const char* bad : {"", "19930725000", "1993072500011", "19930725A001", "199307251001", "199302300001",
                          "196912310001", "199313010001", "199307250X01"})
    CHECK_THROWS_AS(parse_event_id(bad), ParseError);
}

TEST_CASE("event id roundtrip over random valid ids") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const int y = std::uniform_int_distribution<int>(1970, 2100)(rng);
    const unsigned m = std::uniform_int_distribution<unsigned>(1, 12)(rng);
    const unsigned last = static_cast<unsigned>(year_month_day_last{year{y}, month_day_last{month{m}}}.day());
    const unsigned d = std::uniform_int_distribution<unsigned>(1, last)(rng);
    const int seq = std::uniform_int_distribution<int>(0, 99)(rng);
    const EventId id{y, static_cast<int>(m), static_cast<int>(d), seq};
    const std::string text = format_event_id(id);
    REQUIRE(text.size() == 12);
    CHECK(parse_event_id(text) == id);
    CHECK(format_event_id(parse_event_id(text)) == text);
  }
}

TEST_CASE("sentinels decode to unknown per field kind") {
  CHECK_FALSE(decode_coded_numeric(FieldKind::kCount, "-99").is_known());
  CHECK_FALSE(decode_coded_numeric(FieldKind::kCount, "").is_known());
  CHECK_FALSE(decode_coded_numeric(FieldKind::kCount, "Unknown").is_known());
  CHECK(decode_coded_numeric(FieldKind::kCount, "0").value() == 0);
  CHECK(decode_coded_numeric(FieldKind::kCount, "17").value() == 17);

  CHECK_FALSE(decode_coded_numeric(FieldKind::kTriState, "-9").is_known());
  CHECK(decode_coded_numeric(FieldKind::kTriState, "1").value() == 1);

  CHECK_FALSE(decode_coded_numeric(FieldKind::kDatePart, "0").is_known());
  CHECK(decode_coded_numeric(FieldKind::kDatePart, "12").value() == 12);

  CHECK_FALSE(decode_coded_numeric(FieldKind::kCode, "").is_known());
  CHECK(decode_coded_numeric(FieldKind::kCode, "0").value() == 0);

  CHECK_THROWS_AS(decode_coded_numeric(FieldKind::kCount, "twelve"), ParseError);
  CHECK_THROWS_AS(CodedCell::unknown().value(), LookupError);
  CHECK(CodedCell::unknown().value_or(-1) == -1);
}

TEST_CASE("tri-state labels") {
  CHECK(tri_state_label(TriState::kYes) == "Yes");
  CHECK(tri_state_label(TriState::kNo) == "No");
  CHECK(tri_state_label(TriState::kUnknown) == "Unknown");
}

TEST_CASE("code tables carry the codebook domains") {
  CHECK(tables().regions().size() == 13);
  CHECK(tables().attack_types().size() == 9);
  CHECK(tables().attack_types().label(3) == "Bombing/Explosion");
  CHECK(tables().attack_types().is_unknown(9));
  CHECK(tables().target_types().size() == 22);
  CHECK(tables().entity_types().size() == 26);
  CHECK(tables().weapon_types().size() == 13);
  CHECK(tables().weapon_subtypes().size() == 26);
  CHECK(tables().claim_modes().size() == 10);
  CHECK(tables().hostage_outcomes().size() == 7);
  CHECK(tables().property_extents().size() == 4);
  CHECK_THROWS_AS(tables().attack_types().label(42), LookupError);
  CHECK_FALSE(tables().version().empty());
}

TEST_CASE("every published region member resolves to its region") {
  std::set<int> seen;
  for (const auto& r : published_regions()) {
    CHECK(tables().regions().label(r.code) == r.name);
    for (const char* name : r.members) {
      const int code = country(name);
      CHECK_MESSAGE(tables().region_of_country(code) == r.code, name);
      seen.insert(code);
    }
    CHECK(tables().region_members(r.code).size() == r.members.size());
  }
  CHECK(tables().region_of_country(country("India")) == 6);
  CHECK(tables().region_of_country(country("United States")) == 1);
}

TEST_CASE("nationality-only codes belong to no region") {
  CHECK_THROWS_AS(tables().region_of_country(296), LookupError);
  CHECK_FALSE(tables().find_region_of_country(296).has_value());
  CHECK_THROWS_AS(tables().region_of_country(99999), LookupError);
}

TEST_CASE("weapon subtypes map into their weapon types") {
  const std::set<int> allowed{1, 2, 5, 6, 8, 9};
  for (const auto& [code, label] : tables().weapon_subtypes().entries())
    CHECK_MESSAGE(allowed.count(tables().weapon_subtype_parent(code)) == 1, label);
  CHECK(tables().weapon_subtype_parent(1) == 2);
  CHECK(tables().weapon_subtype_parent(2) == 5);
  CHECK(tables().weapon_subtype_parent(7) == 6);
  CHECK(tables().weapon_subtype_parent(18) == 8);
  CHECK(tables().weapon_subtype_parent(23) == 9);
}

TEST_CASE("property bands") {
  const auto& minor = tables().property_band(3);
  CHECK(minor.admits(0));
  CHECK(minor.admits(999'999));
  CHECK_FALSE(minor.admits(1'000'000));
  const auto& major = tables().property_band(2);
  CHECK(major.admits(1'000'001));
  CHECK_FALSE(major.admits(1'000'000));
  CHECK_FALSE(major.admits(1'000'000'000));
  const auto& catastrophic = tables().property_band(1);
  CHECK(catastrophic.admits(1'000'000'001));
  CHECK_FALSE(catastrophic.admits(1'000'000'000));
}

TEST_CASE("watershed dates decide country validity") {
  const int west_germany = country("West Germany (FRG)");
  const int germany = country("Germany");
  const int eritrea = country("Eritrea");

  CHECK(tables().country_validity_at_date(west_germany, ymd(1989, 6, 1)).valid());
  const auto late = tables().country_validity_at_date(west_germany, ymd(1991, 6, 1));
  CHECK_FALSE(late.valid());
  CHECK(late.suggestion == germany);
  CHECK_FALSE(tables().country_validity_at_date(west_germany, ymd(1990, 10, 3)).valid());
  CHECK(tables().country_validity_at_date(west_germany, ymd(1990, 10, 2)).valid());

  CHECK_FALSE(tables().country_validity_at_date(eritrea, ymd(1990, 1, 1)).valid());
  CHECK(tables().country_validity_at_date(eritrea, ymd(1993, 5, 24)).valid());

  const auto early_germany = tables().country_validity_at_date(germany, ymd(1985, 1, 1));
  CHECK_FALSE(early_germany.valid());
  CHECK(early_germany.suggestion == west_germany);

  const int soviet = country("Soviet Union");
  const int russia = country("Russia");
  CHECK(tables().country_validity_at_date(soviet, ymd(1991, 12, 31)).valid());
  CHECK_FALSE(tables().country_validity_at_date(soviet, ymd(1992, 6, 1)).valid());
  const auto early_russia = tables().country_validity_at_date(russia, ymd(1985, 1, 1));
  CHECK_FALSE(early_russia.valid());
  CHECK(early_russia.suggestion == soviet);

  CHECK(tables().country_validity_at_date(country("India"), ymd(1970, 1, 1)).valid());
}

TEST_CASE("malformed table files are rejected") {
  auto files = [] {
    std::map<std::string, std::string> f;
    f["VERSION"] = "test\n";
    return f;
  }();
  CHECK_THROWS_AS(CodebookTables::from_files(files), Error);
}

TEST_CASE("dates parse in both spellings") {
  CHECK(parse_date("1993-07-25") == ymd(1993, 7, 25));
  CHECK(parse_date("7/25/1993") == ymd(1993, 7, 25));
  CHECK(format_date(ymd(1993, 7, 5)) == "1993-07-05");
  CHECK_THROWS_AS(parse_date("1993-02-30"), ParseError);
  CHECK_THROWS_AS(parse_date("yesterday"), ParseError);
}
