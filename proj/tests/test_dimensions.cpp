#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "incube/dimensions.hpp"
#include "incube/error.hpp"
#include "oracles.hpp"

using namespace incube;

namespace {

const CodebookTables& tables() { return CodebookTables::builtin(); }

}  // namespace

TEST_CASE("standard hierarchies") {
  const auto& hs = standard_hierarchies();
  REQUIRE(hs.size() >= 2);
  CHECK(hs[0].name == "time");
  CHECK(hs[0].depth() == 3);
  CHECK(hs[1].name == "space");
  CHECK(hs[1].levels[1].name == "country");
  CHECK(find_hierarchy("SPACE").name == "space");
  CHECK(find_hierarchy("attack").depth() == 1);
  CHECK_THROWS_AS(find_hierarchy("colour"), LookupError);
}

TEST_CASE("time paths use zero-padded labels and cascade unknowns") {
  Incident inc = oracle::incident(1993, 7, 5, 1, 92);
  CHECK(time_path(inc).members == std::vector<std::string>{"1993", "07", "05"});
  inc.day = CodedCell::unknown();
  CHECK(time_path(inc).members == std::vector<std::string>{"1993", "07", "Unknown"});
  inc.day = CodedCell::known(5);
  inc.month = CodedCell::unknown();
  const MemberPath p = time_path(inc);
  CHECK(p.members == std::vector<std::string>{"1993", "Unknown", "Unknown"});
  CHECK(p.cascade_ok());
  CHECK_FALSE(MemberPath{"time", {"Unknown", "07", "05"}}.cascade_ok());
}

TEST_CASE("space paths derive the region from the country") {
  Incident inc = oracle::incident(1993, 7, 5, 1, 92);
  inc.region = 1;  // ignored
  inc.provstate = " Punjab ";
  inc.city = "Amritsar";
  CHECK(space_path(inc, tables()).members == std::vector<std::string>{"South Asia", "India", "Punjab", "Amritsar"});
  inc.provstate = "Unknown";
  CHECK(space_path(inc, tables()).members == std::vector<std::string>{"South Asia", "India", "Unknown", "Unknown"});
  inc.country = 296;
  CHECK_THROWS_AS(space_path(inc, tables()), LookupError);
}

TEST_CASE("flat members key on the first slot") {
  Incident inc = oracle::incident(1993, 7, 5, 1, 92);
  inc.attacktype = {2, 3, std::nullopt};
  CHECK(flat_member(inc, "attack", tables()) == "Armed Assault");
  CHECK(flat_member(inc, "target", tables()) == "Private Citizens & Property");
  CHECK(flat_member(inc, "perpetrator", tables()) == "Group A");
  CHECK(flat_member(inc, "suicide", tables()) == "No");
  inc.attacktype[0] = 9;  // labelled Unknown in the codebook
  CHECK(flat_member(inc, "attack", tables()) == "Unknown");
  inc.attacktype[0].reset();
  CHECK(flat_member(inc, "attack", tables()) == "Unknown");
  inc.gname[0] = "";
  CHECK(flat_member(inc, "perpetrator", tables()) == "Unknown");
  CHECK_THROWS_AS(flat_member(inc, "colour", tables()), LookupError);
}

TEST_CASE("slot members cover every slot and skip unknowns") {
  Incident inc = oracle::incident(1993, 7, 5, 1, 92);
  inc.attacktype = {3, 2, 9};
  CHECK(slot_members(inc, "attack", tables()) == std::vector<std::string>{"Bombing/Explosion", "Armed Assault"});
  inc.gname = {"Group A", "Group B", ""};
  CHECK(slot_members(inc, "perpetrator", tables()) == std::vector<std::string>{"Group A", "Group B"});
  CHECK(slot_members(inc, "region", tables()) == std::vector<std::string>{"South Asia"});
  inc.suicide = TriState::kUnknown;
  CHECK(slot_members(inc, "suicide", tables()).empty());
  CHECK(canonical_item_dimension("target") == "targtype");
  CHECK_THROWS_AS(canonical_item_dimension("colour"), LookupError);
}

TEST_CASE("every generated incident maps to cascade-consistent paths") {
  const auto incidents = oracle::corpus(21, 500);
  for (const auto& inc : incidents)
    for (const auto& h : standard_hierarchies()) {
      const MemberPath p = member_path(inc, h, tables());
      CHECK(p.members.size() == h.levels.size());
      CHECK(p.cascade_ok());
      for (const auto& m : p.members) CHECK_FALSE(m.empty());
    }
}

TEST_CASE("extended incident duration") {
  Incident inc = oracle::incident(1993, 7, 5, 1, 92);
  CHECK_FALSE(extended_duration_days(inc).has_value());
  inc.extended = TriState::kYes;
  inc.resolution = Date{std::chrono::year{1993}, std::chrono::month{8}, std::chrono::day{4}};
  CHECK(extended_duration_days(inc) == 30);
}
