#include "incube/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "incube/error.hpp"
#include "json.hpp"

namespace incube {

void GeneratorProfile::validate() const {
  auto rate = [](double r, const char* name) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error(std::string("profile: ") + name + " must lie in [0, 1]");
  };
  rate(unknown_rate, "unknown_rate");
  rate(multi_slot_rate, "multi_slot_rate");
  rate(hostage_rate, "hostage_rate");
  rate(extended_rate, "extended_rate");
  rate(property_rate, "property_rate");
  rate(claim_rate, "claim_rate");
  if (first_year < 1970 || last_year > 2100 || first_year > last_year)
    throw Error("profile: year range must satisfy 1970 <= first_year <= last_year <= 2100");
  if (group_count < 1 || provinces_per_country < 1 || cities_per_province < 1)
    throw Error("profile: group_count, provinces_per_country and cities_per_province must be >= 1");
}

GeneratorProfile GeneratorProfile::named(std::string_view name) {
  GeneratorProfile p;
  if (name == "default") return p;
  if (name == "dense") {
    p.unknown_rate = 0.0;
    return p;
  }
  if (name == "sparse") {
    p.unknown_rate = 0.35;
    p.multi_slot_rate = 0.3;
    return p;
  }
  throw Error("unknown generator profile '" + std::string(name) + "'");
}

GeneratorProfile GeneratorProfile::from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("profile: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("profile: expected a JSON object");
  GeneratorProfile p;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "first_year")
        p.first_year = value.get<int>();
      else if (key == "last_year")
        p.last_year = value.get<int>();
      else if (key == "unknown_rate")
        p.unknown_rate = value.get<double>();
      else if (key == "multi_slot_rate")
        p.multi_slot_rate = value.get<double>();
      else if (key == "hostage_rate")
        p.hostage_rate = value.get<double>();
      else if (key == "extended_rate")
        p.extended_rate = value.get<double>();
      else if (key == "property_rate")
        p.property_rate = value.get<double>();
      else if (key == "claim_rate")
        p.claim_rate = value.get<double>();
      else if (key == "group_count")
        p.group_count = value.get<int>();
      else if (key == "provinces_per_country")
        p.provinces_per_country = value.get<int>();
      else if (key == "cities_per_province")
        p.cities_per_province = value.get<int>();
      else
        throw Error("profile: unknown field '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("profile: wrong field type: ") + e.what());
  }
  p.validate();
  return p;
}

namespace {

using namespace std::chrono;

// Draws are built directly on mt19937_64 output so a seed gives the same
// corpus with every standard library.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }
  // Inclusive range.
  int range(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[rng_() % v.size()];
  }
  // Heavy-tailed non-negative count with the given mean-ish scale.
  std::int64_t heavy(double scale) {
    const double u = std::max(uniform(), 1e-12);
    return static_cast<std::int64_t>(std::floor(scale * std::pow(u, -0.6) - scale));
  }

 private:
  std::mt19937_64 rng_;
};

TriState yes_no(Draw& d, double p_yes) { return d.chance(p_yes) ? TriState::kYes : TriState::kNo; }

TriState yes_no_unknown(Draw& d, double p_yes, double p_unknown) {
  if (d.chance(p_unknown)) return TriState::kUnknown;
  return yes_no(d, p_yes);
}

const char* kMonthNames[] = {"January", "February", "March",     "April",   "May",      "June",
                             "July",    "August",   "September", "October", "November", "December"};

// Fills up to n slots, each further slot with probability p; values distinct.
template <std::size_t N>
void fill_slots(Draw& d, std::array<Code, N>& slots, std::size_t max_used, double p, int lo, int hi) {
  slots.fill(std::nullopt);
  std::vector<int> used;
  for (std::size_t k = 0; k < std::min(N, max_used); ++k) {
    if (k > 0 && !d.chance(p)) break;
    int v = d.range(lo, hi);
    for (int tries = 0; std::find(used.begin(), used.end(), v) != used.end() && tries < 8; ++tries) v = d.range(lo, hi);
    if (std::find(used.begin(), used.end(), v) != used.end()) break;
    used.push_back(v);
    slots[k] = v;
  }
}

CodedCell maybe_unknown(Draw& d, double p_unknown, std::int64_t v) {
  return d.chance(p_unknown) ? CodedCell::unknown() : CodedCell::known(v);
}

}  // namespace

std::vector<Incident> generate_synthetic(std::uint64_t seed, std::size_t n, const GeneratorProfile& profile,
                                         const CodebookTables& tables) {
  profile.validate();
  const auto span_days = (sys_days{Date{year{profile.last_year}, December, day{31}}} -
                          sys_days{Date{year{profile.first_year}, January, day{1}}})
                             .count() +
                         1;
  if (n > static_cast<std::size_t>(span_days) * 100)
    throw Error("cannot place " + std::to_string(n) + " incidents: at most 100 case numbers per day");
  Draw d(seed);

  std::vector<int> placeable;  // countries with a region
  for (const auto& [code, name] : tables.countries().entries())
    if (tables.find_region_of_country(code)) placeable.push_back(code);
  std::vector<int> all_countries;
  for (const auto& [code, name] : tables.countries().entries()) all_countries.push_back(code);

  std::map<int, std::vector<int>> subtypes_of;
  for (const auto& [code, name] : tables.weapon_subtypes().entries())
    subtypes_of[tables.weapon_subtype_parent(code)].push_back(code);

  const int max_attack = tables.attack_types().entries().rbegin()->first;
  const int max_target = tables.target_types().entries().rbegin()->first;
  const int max_entity = tables.entity_types().entries().rbegin()->first;
  const int max_weapon = tables.weapon_types().entries().rbegin()->first;
  const int max_claim = tables.claim_modes().entries().rbegin()->first;
  const int max_outcome = tables.hostage_outcomes().entries().rbegin()->first;
  const int max_alt = tables.alternatives().entries().rbegin()->first;

  std::map<Date, int> cases_per_day;
  std::vector<Incident> out;
  out.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    Incident inc;

    // Recording date and case number.
    Date date;
    for (;;) {
      const year y{d.range(profile.first_year, profile.last_year)};
      const month m{static_cast<unsigned>(d.range(1, 12))};
      const unsigned last = static_cast<unsigned>(year_month_day_last{y, month_day_last{m}}.day());
      date = Date{y, m, day{static_cast<unsigned>(d.range(1, static_cast<int>(last)))}};
      if (cases_per_day[date] < 100) break;
    }
    inc.eventid = EventId{static_cast<int>(date.year()), static_cast<int>(static_cast<unsigned>(date.month())),
                          static_cast<int>(static_cast<unsigned>(date.day())), cases_per_day[date]++};

    inc.year = CodedCell::known(inc.eventid.year);
    if (d.chance(profile.unknown_rate / 2)) {
      inc.month = CodedCell::unknown();
      inc.day = CodedCell::unknown();
      inc.approxdate =
          (inc.eventid.month <= 6 ? "first half of " : "second half of ") + std::to_string(inc.eventid.year);
    } else {
      inc.month = CodedCell::known(inc.eventid.month);
      if (d.chance(profile.unknown_rate)) {
        inc.day = CodedCell::unknown();
        inc.approxdate = std::string(kMonthNames[inc.eventid.month - 1]) + " " + std::to_string(inc.eventid.year);
      } else {
        inc.day = CodedCell::known(inc.eventid.day);
      }
    }

    if (d.chance(profile.extended_rate)) {
      inc.extended = TriState::kYes;
      if (d.chance(0.8)) inc.resolution = Date{sys_days{date} + days{d.range(1, 60)}};
    } else {
      inc.extended = TriState::kNo;
    }

    // Location: a country valid over the whole window the date parts allow.
    const Date window_lo = inc.month.is_known() ? (inc.day.is_known() ? date : Date{date.year(), date.month(), day{1}})
                                                : Date{date.year(), January, day{1}};
    const Date window_hi =
        inc.month.is_known()
            ? (inc.day.is_known() ? date : Date{year_month_day_last{date.year(), month_day_last{date.month()}}})
            : Date{date.year(), December, day{31}};
    for (;;) {
      const int c = d.pick(placeable);
      const ValidityWindow w = tables.country_validity_window(c);
      if ((w.from && window_lo < *w.from) || (w.until && window_hi >= *w.until)) continue;
      inc.country = c;
      break;
    }
    inc.region = tables.region_of_country(*inc.country);
    if (!d.chance(profile.unknown_rate)) {
      const int prov = d.range(1, profile.provinces_per_country);
      inc.provstate = "Province " + std::to_string(*inc.country) + "-" + std::to_string(prov);
      if (!d.chance(profile.unknown_rate))
        inc.city = "City " + std::to_string(*inc.country) + "-" + std::to_string(prov) + "-" +
                   std::to_string(d.range(1, profile.cities_per_province));
    }
    inc.vicinity = yes_no(d, 0.1);
    inc.summary = "Synthetic incident " + format_event_id(inc.eventid);

    inc.crit1 = yes_no(d, 0.92);
    inc.crit2 = yes_no(d, 0.92);
    inc.crit3 = yes_no(d, 0.85);
    if (inc.eventid.year < 1998) {
      inc.doubtterr = TriState::kUnknown;
    } else {
      inc.doubtterr = yes_no(d, 0.15);
      if (inc.doubtterr == TriState::kYes && d.chance(0.7)) inc.alternative = d.range(1, max_alt);
    }
    inc.multiple = yes_no(d, 0.1);
    inc.conflict = yes_no(d, 0.1);
    inc.success = yes_no(d, 0.88);
    inc.suicide = yes_no(d, 0.04);

    fill_slots(d, inc.attacktype, 3, profile.multi_slot_rate, 1, max_attack);

    fill_slots(d, inc.targtype, 3, profile.multi_slot_rate, 1, max_target);
    for (std::size_t k = 0; k < 3; ++k) {
      if (!inc.targtype[k]) continue;
      inc.entity[k] = d.range(1, max_entity);
      inc.natlty[k] = d.chance(0.8) ? *inc.country : d.pick(all_countries);
      inc.corp[k] = "Entity " + std::to_string(d.range(1, 200));
      inc.target[k] = "Target " + std::to_string(d.range(1, 500));
    }

    if (!d.chance(profile.unknown_rate * 2)) {
      inc.gname[0] = "Group " + std::to_string(d.range(1, profile.group_count));
      for (std::size_t k = 1; k < 3 && d.chance(profile.multi_slot_rate / 2); ++k) {
        const std::string g = "Group " + std::to_string(d.range(1, profile.group_count));
        if (std::find(inc.gname.begin(), inc.gname.end(), g) != inc.gname.end()) break;
        inc.gname[k] = g;
      }
      inc.guncertain = yes_no(d, 0.1);
    } else {
      inc.gname[0] = "Unknown";
      inc.guncertain = TriState::kNo;
    }
    inc.motive = d.chance(0.3) ? "Stated motive " + std::to_string(d.range(1, 20)) : std::string();

    const std::int64_t perps = 1 + d.heavy(2.0);
    inc.nperps = maybe_unknown(d, profile.unknown_rate * 3, perps);
    inc.nperpcap = maybe_unknown(d, profile.unknown_rate,
                                 d.chance(0.8) ? 0 : d.range(0, static_cast<int>(std::min<std::int64_t>(perps, 1000))));

    for (std::size_t k = 0; k < 3; ++k) {
      if (k > 0 && inc.gname[k].empty()) break;
      if (inc.gname[k] == "Unknown") break;
      inc.claimed[k] = yes_no_unknown(d, profile.claim_rate, profile.unknown_rate);
      if (inc.claimed[k] == TriState::kYes) {
        inc.claimmode[k] = d.range(1, max_claim);
        inc.claimconf[k] = yes_no_unknown(d, 0.6, 0.2);
      }
    }
    if (!inc.gname[1].empty()) inc.compclaim = yes_no_unknown(d, 0.1, profile.unknown_rate);

    fill_slots(d, inc.weaptype, 4, profile.multi_slot_rate, 1, max_weapon);
    for (std::size_t k = 0; k < 4; ++k) {
      if (!inc.weaptype[k]) break;
      const auto it = subtypes_of.find(*inc.weaptype[k]);
      if (it != subtypes_of.end() && d.chance(0.8)) inc.weapsubtype[k] = d.pick(it->second);
    }

    const std::int64_t kills = d.heavy(1.5);
    inc.nkill = maybe_unknown(d, profile.unknown_rate, kills);
    inc.nkillus = maybe_unknown(d, profile.unknown_rate,
                                d.chance(0.95) ? 0 : d.range(0, static_cast<int>(std::min<std::int64_t>(kills, 50))));
    inc.nkillter = maybe_unknown(d, profile.unknown_rate,
                                 d.chance(0.85) ? 0 : d.range(0, static_cast<int>(std::min<std::int64_t>(kills, 20))));
    const std::int64_t wounds = d.heavy(3.0);
    inc.nwound = maybe_unknown(d, profile.unknown_rate, wounds);
    inc.nwoundus = maybe_unknown(d, profile.unknown_rate,
                                 d.chance(0.95) ? 0 : d.range(0, static_cast<int>(std::min<std::int64_t>(wounds, 50))));
    inc.nwoundte = maybe_unknown(d, profile.unknown_rate,
                                 d.chance(0.9) ? 0 : d.range(0, static_cast<int>(std::min<std::int64_t>(wounds, 20))));

    if (d.chance(profile.property_rate)) {
      inc.property = TriState::kYes;
      const double u = d.uniform();
      inc.propextent = u < 0.01 ? 1 : u < 0.1 ? 2 : u < 0.8 ? 3 : 4;
      if (*inc.propextent != 4 && d.chance(0.6)) {
        std::int64_t v = 0;
        switch (*inc.propextent) {
          case 1:
            v = 1'000'000'001LL + d.range(0, 1'000'000'000);
            break;
          case 2:
            v = 1'000'001LL + d.range(0, 998'999'998);
            break;
          default:
            v = d.range(0, 999'999);
            break;
        }
        inc.propvalue = CodedCell::known(v);
      }
      if (d.chance(0.3)) inc.propcomment = "Damage to property " + std::to_string(d.range(1, 99));
    } else {
      inc.property = d.chance(profile.unknown_rate) ? TriState::kUnknown : TriState::kNo;
    }

    const bool hostage_attack = std::any_of(inc.attacktype.begin(), inc.attacktype.end(),
                                            [](const Code& c) { return c && (*c == 4 || *c == 5 || *c == 6); });
    if (hostage_attack || d.chance(profile.hostage_rate)) {
      inc.ishostkid = TriState::kYes;
      const std::int64_t hostages = 1 + d.heavy(2.0);
      inc.nhostkid = maybe_unknown(d, profile.unknown_rate, hostages);
      inc.nhostkidus = maybe_unknown(d, profile.unknown_rate, d.chance(0.9) ? 0 : 1);
      if (d.chance(0.5))
        inc.nhours = maybe_unknown(d, profile.unknown_rate, d.range(0, 23));
      else
        inc.ndays = maybe_unknown(d, profile.unknown_rate, d.range(1, 400));
      if (d.chance(0.2)) inc.divert = "Country " + std::to_string(d.pick(all_countries));
      if (d.chance(0.2)) inc.kidhijcountry = "Country " + std::to_string(d.pick(all_countries));
      inc.ransom = yes_no_unknown(d, 0.3, profile.unknown_rate);
      if (inc.ransom == TriState::kYes) {
        const std::int64_t demanded = 1000LL * d.range(1, 5000);
        inc.ransomamt = maybe_unknown(d, 0.3, demanded);
        inc.ransomamtus = maybe_unknown(d, 0.3, d.chance(0.9) ? 0 : demanded);
        inc.ransompaid = maybe_unknown(d, 0.5, d.chance(0.5) ? 0 : demanded / 2);
        inc.ransompaidus = maybe_unknown(d, 0.5, 0);
        if (d.chance(0.3)) inc.ransomnote = "Ransom note " + std::to_string(d.range(1, 50));
      }
      inc.hostkidoutcome = d.range(1, max_outcome);
      inc.nreleased = maybe_unknown(
          d, profile.unknown_rate,
          inc.nhostkid.is_known() ? d.range(0, static_cast<int>(std::min<std::int64_t>(hostages, 1000))) : 0);
    } else {
      inc.ishostkid = TriState::kNo;
      inc.ransom = TriState::kNo;
    }

    if (d.chance(0.1)) inc.addnotes = "Note " + std::to_string(d.range(1, 1000));
    inc.scite[0] = "Source " + std::to_string(d.range(1, 300));
    if (d.chance(0.4)) inc.scite[1] = "Source " + std::to_string(d.range(1, 300));

    out.push_back(std::move(inc));
  }
  std::sort(out.begin(), out.end(), [](const Incident& a, const Incident& b) { return a.eventid < b.eventid; });
  return out;
}

}  // namespace incube
