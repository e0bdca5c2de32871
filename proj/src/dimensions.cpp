#include "incube/dimensions.hpp"

#include <algorithm>
#include <cstdio>

#include "incube/error.hpp"
#include "incube/strings.hpp"

namespace incube {

const std::vector<Hierarchy>& standard_hierarchies() {
  static const std::vector<Hierarchy> hs = [] {
    std::vector<Hierarchy> out;
    out.push_back(
        {"time", {{"year", LevelDomain::kInteger}, {"month", LevelDomain::kInteger}, {"day", LevelDomain::kInteger}}});
    out.push_back({"space",
                   {{"region", LevelDomain::kCoded},
                    {"country", LevelDomain::kCoded},
                    {"provstate", LevelDomain::kText},
                    {"city", LevelDomain::kText}}});
    for (const auto& dim : flat_dimensions())
      out.push_back({dim, {{dim, dim == "perpetrator" ? LevelDomain::kText : LevelDomain::kCoded}}});
    return out;
  }();
  return hs;
}

const Hierarchy& find_hierarchy(std::string_view name) {
  for (const auto& h : standard_hierarchies())
    if (iequals(h.name, name)) return h;
  throw LookupError("unknown dimension '" + std::string(name) + "'");
}

bool MemberPath::cascade_ok() const {
  bool unknown_seen = false;
  for (const auto& m : members) {
    if (m == kUnknownMember)
      unknown_seen = true;
    else if (unknown_seen)
      return false;
  }
  return true;
}

namespace {

std::string two_digits(std::int64_t v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", static_cast<int>(v));
  return buf;
}

std::string text_member(const std::string& s) {
  const std::string_view t = trim(s);
  if (t.empty() || t == kUnknownMember) return std::string(kUnknownMember);
  return std::string(t);
}

std::string code_member(const Code& code, const CodeTable& table) {
  if (!code || !table.contains(*code) || table.is_unknown(*code)) return std::string(kUnknownMember);
  return table.label(*code);
}

std::string tri_member(TriState t) { return std::string(tri_state_label(t)); }

void cascade(std::vector<std::string>& members) {
  bool unknown = false;
  for (auto& m : members) {
    if (unknown) m = std::string(kUnknownMember);
    if (m == kUnknownMember) unknown = true;
  }
}

}  // namespace

MemberPath time_path(const Incident& inc) {
  MemberPath p{"time", {}};
  p.members.push_back(inc.year.is_known() ? std::to_string(inc.year.value()) : std::string(kUnknownMember));
  p.members.push_back(inc.month.is_known() ? two_digits(inc.month.value()) : std::string(kUnknownMember));
  p.members.push_back(inc.day.is_known() ? two_digits(inc.day.value()) : std::string(kUnknownMember));
  cascade(p.members);
  return p;
}

MemberPath space_path(const Incident& inc, const CodebookTables& tables) {
  if (!inc.country) throw LookupError("incident has no country");
  const int region = tables.region_of_country(*inc.country);
  MemberPath p{"space", {}};
  p.members.push_back(tables.regions().label(region));
  p.members.push_back(tables.countries().label(*inc.country));
  p.members.push_back(text_member(inc.provstate));
  p.members.push_back(text_member(inc.city));
  cascade(p.members);
  return p;
}

const std::vector<std::string>& flat_dimensions() {
  static const std::vector<std::string> dims = {"attack",  "target",    "weapon",         "perpetrator", "success",
                                                "suicide", "claimmode", "hostkidoutcome", "propextent",  "crit1",
                                                "crit2",   "crit3",     "doubtterr"};
  return dims;
}

std::string flat_member(const Incident& inc, std::string_view dim, const CodebookTables& tables) {
  if (dim == "attack") return code_member(inc.attacktype[0], tables.attack_types());
  if (dim == "target") return code_member(inc.targtype[0], tables.target_types());
  if (dim == "weapon") return code_member(inc.weaptype[0], tables.weapon_types());
  if (dim == "perpetrator") return text_member(inc.gname[0]);
  if (dim == "success") return tri_member(inc.success);
  if (dim == "suicide") return tri_member(inc.suicide);
  if (dim == "claimmode") return code_member(inc.claimmode[0], tables.claim_modes());
  if (dim == "hostkidoutcome") return code_member(inc.hostkidoutcome, tables.hostage_outcomes());
  if (dim == "propextent") return code_member(inc.propextent, tables.property_extents());
  if (dim == "crit1") return tri_member(inc.crit1);
  if (dim == "crit2") return tri_member(inc.crit2);
  if (dim == "crit3") return tri_member(inc.crit3);
  if (dim == "doubtterr") return tri_member(inc.doubtterr);
  throw LookupError("unknown flat dimension '" + std::string(dim) + "'");
}

MemberPath member_path(const Incident& inc, const Hierarchy& h, const CodebookTables& tables) {
  if (h.name == "time") return time_path(inc);
  if (h.name == "space") return space_path(inc, tables);
  return MemberPath{h.name, {flat_member(inc, h.name, tables)}};
}

const std::vector<std::string>& item_dimensions() {
  static const std::vector<std::string> dims = {"attack",     "targtype",       "weapon",  "weapsubtype", "region",
                                                "country",    "gname",          "suicide", "success",     "claimmode",
                                                "propextent", "hostkidoutcome", "crit1",   "crit2",       "crit3",
                                                "doubtterr",  "multiple",       "extended"};
  return dims;
}

std::string canonical_item_dimension(std::string_view dim) {
  const std::string d = to_lower(dim);
  if (d == "target") return "targtype";
  if (d == "perpetrator") return "gname";
  for (const auto& known : item_dimensions())
    if (known == d) return d;
  throw LookupError("unknown item dimension '" + std::string(dim) + "'");
}

std::vector<std::string> slot_members(const Incident& inc, std::string_view item_dim, const CodebookTables& tables) {
  std::vector<std::string> out;
  auto add = [&](std::string m) {
    if (m == kUnknownMember) return;
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(std::move(m));
  };
  auto add_codes = [&](const auto& slots, const CodeTable& table) {
    for (const Code& c : slots) add(code_member(c, table));
  };
  auto add_tri = [&](TriState t) { add(tri_member(t)); };

  const std::string dim = canonical_item_dimension(item_dim);
  if (dim == "attack")
    add_codes(inc.attacktype, tables.attack_types());
  else if (dim == "targtype")
    add_codes(inc.targtype, tables.target_types());
  else if (dim == "weapon")
    add_codes(inc.weaptype, tables.weapon_types());
  else if (dim == "weapsubtype")
    add_codes(inc.weapsubtype, tables.weapon_subtypes());
  else if (dim == "region") {
    if (inc.country)
      if (const auto r = tables.find_region_of_country(*inc.country)) add(tables.regions().label(*r));
  } else if (dim == "country") {
    add(code_member(inc.country, tables.countries()));
  } else if (dim == "gname") {
    for (const auto& g : inc.gname) add(text_member(g));
  } else if (dim == "suicide")
    add_tri(inc.suicide);
  else if (dim == "success")
    add_tri(inc.success);
  else if (dim == "claimmode")
    add_codes(inc.claimmode, tables.claim_modes());
  else if (dim == "propextent")
    add(code_member(inc.propextent, tables.property_extents()));
  else if (dim == "hostkidoutcome")
    add(code_member(inc.hostkidoutcome, tables.hostage_outcomes()));
  else if (dim == "crit1")
    add_tri(inc.crit1);
  else if (dim == "crit2")
    add_tri(inc.crit2);
  else if (dim == "crit3")
    add_tri(inc.crit3);
  else if (dim == "doubtterr")
    add_tri(inc.doubtterr);
  else if (dim == "multiple")
    add_tri(inc.multiple);
  else if (dim == "extended")
    add_tri(inc.extended);
  return out;
}

std::optional<int> extended_duration_days(const Incident& inc) {
  if (!inc.resolution || !inc.year.is_known() || !inc.month.is_known() || !inc.day.is_known()) return std::nullopt;
  using namespace std::chrono;
  const Date start{year{static_cast<int>(inc.year.value())}, month{static_cast<unsigned>(inc.month.value())},
                   day{static_cast<unsigned>(inc.day.value())}};
  if (!start.ok()) return std::nullopt;
  return static_cast<int>((sys_days{*inc.resolution} - sys_days{start}).count());
}

}  // namespace incube
