#include "incube/cube.hpp"

#include <algorithm>
#include <unordered_set>

#include "incube/error.hpp"
#include "incube/strings.hpp"

namespace incube {

namespace {

using MeasureField = CodedCell Incident::*;

struct MeasureSource {
  const char* name;
  MeasureField field;
};

const std::vector<MeasureSource>& measure_sources() {
  static const std::vector<MeasureSource> sources = {
      {"nkill", &Incident::nkill},         {"nwound", &Incident::nwound},         {"nkillus", &Incident::nkillus},
      {"nkillter", &Incident::nkillter},   {"nwoundus", &Incident::nwoundus},     {"nwoundte", &Incident::nwoundte},
      {"nperps", &Incident::nperps},       {"nperpcap", &Incident::nperpcap},     {"propvalue", &Incident::propvalue},
      {"ransomamt", &Incident::ransomamt}, {"ransompaid", &Incident::ransompaid}, {"nhostkid", &Incident::nhostkid},
      {"nreleased", &Incident::nreleased},
  };
  return sources;
}

constexpr std::string_view kIncidentCount = "incident_count";

}  // namespace

const std::vector<MeasureDef>& measure_catalog() {
  static const std::vector<MeasureDef> catalog = [] {
    std::vector<MeasureDef> out{{std::string(kIncidentCount), Aggregator::kCount}};
    for (const auto& s : measure_sources()) out.push_back({s.name, Aggregator::kSum});
    return out;
  }();
  return catalog;
}

const MeasureDef& find_measure(std::string_view name) {
  for (const auto& m : measure_catalog())
    if (m.name == name) return m;
  throw QueryError("unknown measure '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

std::string MemberDictionary::key(std::uint32_t parent, std::string_view label) {
  std::string k = std::to_string(parent);
  k.push_back('\x1f');
  k.append(label);
  return k;
}

std::uint32_t MemberDictionary::intern(std::uint32_t parent, std::string_view label) {
  auto [it, inserted] = index_.try_emplace(key(parent, label), static_cast<std::uint32_t>(entries_.size()));
  if (inserted) entries_.push_back({parent, std::string(label)});
  return it->second;
}

std::optional<std::uint32_t> MemberDictionary::find(std::uint32_t parent, std::string_view label) const {
  const auto it = index_.find(key(parent, label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> DimensionColumns::path(std::size_t row, int depth) const {
  std::vector<std::string> out(static_cast<std::size_t>(depth));
  std::uint32_t id = keys[static_cast<std::size_t>(depth - 1)][row];
  for (int level = depth - 1; level >= 0; --level) {
    const auto& e = levels[static_cast<std::size_t>(level)].entry(id);
    out[static_cast<std::size_t>(level)] = e.label;
    id = e.parent;
  }
  return out;
}

std::vector<std::string> ItemStore::row_items(std::size_t row) const {
  std::vector<std::string> out;
  for (std::uint32_t i = offsets[row]; i < offsets[row + 1]; ++i) out.push_back(items[ids[i]]);
  return out;
}

const DimensionColumns& FactTable::dimension(std::string_view hierarchy) const {
  for (const auto& d : dimensions)
    if (iequals(d.hierarchy.name, hierarchy)) return d;
  throw QueryError("unknown dimension '" + std::string(hierarchy) + "'");
}

const MeasureColumn* FactTable::measure(std::string_view name) const {
  for (const auto& m : measures)
    if (m.name == name) return &m;
  return nullptr;
}

FactTable build_facts(std::span<const Incident> incidents, const CodebookTables& tables) {
  FactTable t;
  t.codebook_version = tables.version();
  t.rows = incidents.size();

  for (const auto& h : standard_hierarchies()) {
    DimensionColumns d;
    d.hierarchy = h;
    d.levels.resize(h.levels.size());
    d.keys.assign(h.levels.size(), {});
    for (auto& k : d.keys) k.reserve(incidents.size());
    t.dimensions.push_back(std::move(d));
  }
  for (const auto& s : measure_sources()) {
    MeasureColumn m;
    m.name = s.name;
    m.values.reserve(incidents.size());
    m.unknown.reserve(incidents.size());
    t.measures.push_back(std::move(m));
  }
  t.eventids.reserve(incidents.size());

  std::unordered_map<std::string, std::uint32_t> item_index;
  for (const auto& inc : incidents) {
    for (auto& d : t.dimensions) {
      const MemberPath p = member_path(inc, d.hierarchy, tables);
      std::uint32_t parent = MemberDictionary::kNoParent;
      for (std::size_t level = 0; level < p.members.size(); ++level) {
        parent = d.levels[level].intern(parent, p.members[level]);
        d.keys[level].push_back(parent);
      }
    }
    const auto& sources = measure_sources();
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const CodedCell& c = inc.*(sources[i].field);
      t.measures[i].values.push_back(c.value_or(0));
      t.measures[i].unknown.push_back(c.is_known() ? 0 : 1);
    }
    t.eventids.push_back(inc.eventid);
    for (const auto& dim : item_dimensions()) {
      for (const auto& member : slot_members(inc, dim, tables)) {
        std::string item = dim + "=" + member;
        auto [it, inserted] = item_index.try_emplace(item, static_cast<std::uint32_t>(t.items.items.size()));
        if (inserted) t.items.items.push_back(std::move(item));
        t.items.ids.push_back(it->second);
      }
    }
    t.items.offsets.push_back(static_cast<std::uint32_t>(t.items.ids.size()));
  }
  return t;
}

// ---------------------------------------------------------------------------

namespace {

std::string canonical_hierarchy_name(std::string_view name) {
  if (iequals(name, "targtype")) return "target";
  if (iequals(name, "gname")) return "perpetrator";
  try {
    return find_hierarchy(name).name;
  } catch (const LookupError& e) {
    throw QueryError(e.what());
  }
}

}  // namespace

GroupBy parse_level_ref(std::string_view text) {
  const std::string_view t = trim(text);
  const auto sep = t.find_first_of(":.");
  const std::string_view head = t.substr(0, sep);

  std::string name;
  int depth = 1;
  try {
    name = canonical_hierarchy_name(head);
  } catch (const QueryError&) {
    // A bare level name such as "country".
    if (sep != std::string_view::npos) throw;
    for (const auto& h : standard_hierarchies())
      for (std::size_t i = 0; i < h.levels.size(); ++i)
        if (iequals(h.levels[i].name, head)) return {h.name, static_cast<int>(i) + 1};
    throw;
  }
  const Hierarchy& h = find_hierarchy(name);
  if (sep != std::string_view::npos) {
    const std::string_view rest = t.substr(sep + 1);
    if (t[sep] == ':') {
      const auto d = parse_int(rest);
      if (!d) throw QueryError("bad depth in '" + std::string(text) + "'");
      depth = static_cast<int>(*d);
    } else {
      depth = 0;
      for (std::size_t i = 0; i < h.levels.size(); ++i)
        if (iequals(h.levels[i].name, rest)) depth = static_cast<int>(i) + 1;
      if (depth == 0) throw QueryError("dimension '" + name + "' has no level '" + std::string(rest) + "'");
    }
  }
  if (depth < 1 || depth > h.depth())
    throw QueryError("depth " + std::to_string(depth) + " outside 1.." + std::to_string(h.depth()) + " for '" + name +
                     "'");
  return {name, depth};
}

bool is_tri_state_dimension(std::string_view hierarchy) {
  static const char* const dims[] = {"success", "suicide", "crit1", "crit2", "crit3", "doubtterr"};
  for (const char* d : dims)
    if (iequals(d, hierarchy)) return true;
  return false;
}

namespace {

void check_depth(const std::string& name, int depth) {
  const Hierarchy& h = find_hierarchy(name);
  if (depth < 1 || depth > h.depth())
    throw QueryError("depth " + std::to_string(depth) + " outside 1.." + std::to_string(h.depth()) + " for '" + name +
                     "'");
}

bool member_exists(const MemberDictionary& dict, const std::string& label) {
  for (const auto& e : dict.entries())
    if (e.label == label) return true;
  return false;
}

Filter normalize_filter(const FactTable& table, const Filter& f) {
  Filter out;
  const GroupBy ref = parse_level_ref(f.dim);
  out.dim = ref.hierarchy;
  out.depth = f.dim.find_first_of(":.") == std::string::npos && ref.depth == 1 ? f.depth : ref.depth;
  check_depth(out.dim, out.depth);
  out.members = f.members;
  if (f.tristate) {
    if (!is_tri_state_dimension(out.dim)) throw QueryError("dimension '" + out.dim + "' is not tri-state");
    out.members.emplace_back(tri_state_label(*f.tristate));
  }
  if (out.members.empty()) throw QueryError("filter on '" + out.dim + "' selects no members");
  std::sort(out.members.begin(), out.members.end());
  out.members.erase(std::unique(out.members.begin(), out.members.end()), out.members.end());

  const auto& dict = table.dimension(out.dim).levels[static_cast<std::size_t>(out.depth - 1)];
  for (const auto& m : out.members) {
    if (is_tri_state_dimension(out.dim) && (m == "Yes" || m == "No" || m == kUnknownMember)) continue;
    if (!member_exists(dict, m)) throw QueryError("dimension '" + out.dim + "' has no member '" + m + "'");
  }
  return out;
}

}  // namespace

CellQuery normalize_query(const FactTable& table, const CellQuery& q) {
  CellQuery out;
  for (const auto& g : q.group_by) {
    GroupBy n{canonical_hierarchy_name(g.hierarchy), g.depth};
    check_depth(n.hierarchy, n.depth);
    for (const auto& prev : out.group_by)
      if (prev.hierarchy == n.hierarchy) throw QueryError("dimension '" + n.hierarchy + "' grouped twice");
    out.group_by.push_back(n);
  }
  for (const auto& f : q.filters) out.filters.push_back(normalize_filter(table, f));
  for (const auto& m : q.measures) {
    find_measure(m);
    if (std::find(out.measures.begin(), out.measures.end(), m) != out.measures.end())
      throw QueryError("measure '" + m + "' requested twice");
    out.measures.push_back(m);
  }
  if (out.measures.empty()) out.measures.emplace_back(kIncidentCount);
  return out;
}

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint32_t>& k) const {
    std::size_t h = 1469598103934665603ull;
    for (std::uint32_t v : k) h = (h ^ v) * 1099511628211ull;
    return h;
  }
};

}  // namespace

CellResult aggregate(const FactTable& table, const CellQuery& query) {
  const CellQuery q = normalize_query(table, query);

  struct ActiveFilter {
    const std::vector<std::uint32_t>* keys;
    std::vector<std::uint8_t> allowed;
  };
  std::vector<ActiveFilter> filters;
  for (const auto& f : q.filters) {
    const auto& d = table.dimension(f.dim);
    const auto level = static_cast<std::size_t>(f.depth - 1);
    ActiveFilter af{&d.keys[level], std::vector<std::uint8_t>(d.levels[level].size(), 0)};
    for (std::size_t id = 0; id < d.levels[level].size(); ++id)
      if (std::binary_search(f.members.begin(), f.members.end(), d.levels[level].entry(id).label)) af.allowed[id] = 1;
    filters.push_back(std::move(af));
  }

  std::vector<const DimensionColumns*> axis_dims;
  std::vector<const std::vector<std::uint32_t>*> axis_keys;
  for (const auto& g : q.group_by) {
    const auto& d = table.dimension(g.hierarchy);
    axis_dims.push_back(&d);
    axis_keys.push_back(&d.keys[static_cast<std::size_t>(g.depth - 1)]);
  }

  std::vector<const MeasureColumn*> columns;
  for (const auto& m : q.measures) columns.push_back(m == kIncidentCount ? nullptr : table.measure(m));

  struct Accum {
    std::size_t first_row;
    std::vector<MeasureCell> values;
  };
  std::unordered_map<std::vector<std::uint32_t>, Accum, KeyHash> groups;
  CellResult r;
  r.axes = q.group_by;
  r.measures = q.measures;

  std::vector<std::uint32_t> key(axis_keys.size());
  for (std::size_t row = 0; row < table.rows; ++row) {
    bool pass = true;
    for (const auto& f : filters)
      if (!f.allowed[(*f.keys)[row]]) {
        pass = false;
        break;
      }
    if (!pass) continue;
    ++r.total;
    for (std::size_t a = 0; a < axis_keys.size(); ++a) key[a] = (*axis_keys[a])[row];
    auto [it, inserted] = groups.try_emplace(key, Accum{row, std::vector<MeasureCell>(columns.size())});
    auto& values = it->second.values;
    for (std::size_t m = 0; m < columns.size(); ++m) {
      if (!columns[m]) {
        ++values[m].sum;
        ++values[m].known;
      } else if (columns[m]->unknown[row]) {
        ++values[m].unknown;
      } else {
        values[m].sum += columns[m]->values[row];
        ++values[m].known;
      }
    }
  }

  r.cells.reserve(groups.size());
  for (auto& [k, acc] : groups) {
    Cell c;
    for (std::size_t a = 0; a < axis_dims.size(); ++a) {
      auto labels = axis_dims[a]->path(acc.first_row, q.group_by[a].depth);
      c.path.insert(c.path.end(), labels.begin(), labels.end());
    }
    c.values = std::move(acc.values);
    r.cells.push_back(std::move(c));
  }
  std::sort(r.cells.begin(), r.cells.end(), [](const Cell& a, const Cell& b) { return a.path < b.path; });
  return r;
}

// ---------------------------------------------------------------------------

namespace {

GroupBy& grouped(CellQuery& q, std::string_view hierarchy) {
  const std::string name = canonical_hierarchy_name(hierarchy);
  for (auto& g : q.group_by)
    if (canonical_hierarchy_name(g.hierarchy) == name) return g;
  throw QueryError("dimension '" + name + "' is not grouped");
}

}  // namespace

CellQuery rollup(const CellQuery& q, std::string_view hierarchy) {
  CellQuery out = q;
  GroupBy& g = grouped(out, hierarchy);
  if (g.depth <= 1) throw QueryError("cannot roll up '" + g.hierarchy + "' past its top level");
  --g.depth;
  return out;
}

CellQuery drilldown(const CellQuery& q, std::string_view hierarchy) {
  CellQuery out = q;
  GroupBy& g = grouped(out, hierarchy);
  if (g.depth >= find_hierarchy(canonical_hierarchy_name(g.hierarchy)).depth())
    throw QueryError("cannot drill down '" + g.hierarchy + "' past its leaf level");
  ++g.depth;
  return out;
}

CellQuery pivot(const CellQuery& q, std::size_t a, std::size_t b) {
  if (a >= q.group_by.size() || b >= q.group_by.size()) throw QueryError("pivot axis out of range");
  CellQuery out = q;
  std::swap(out.group_by[a], out.group_by[b]);
  return out;
}

CellQuery dice(const FactTable& table, const CellQuery& q, std::string_view dim,
               const std::vector<std::string>& members) {
  if (members.empty()) throw QueryError("dice needs at least one member");
  const GroupBy ref = parse_level_ref(dim);
  Filter f{ref.hierarchy, ref.depth, members, std::nullopt};
  normalize_filter(table, f);
  CellQuery out = q;
  out.filters.push_back(std::move(f));
  return out;
}

CellQuery slice(const FactTable& table, const CellQuery& q, std::string_view dim, const std::string& member) {
  CellQuery out = dice(table, q, dim, {member});
  const std::string name = out.filters.back().dim;
  std::erase_if(out.group_by, [&](const GroupBy& g) { return canonical_hierarchy_name(g.hierarchy) == name; });
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json query_to_json(const CellQuery& q) {
  nlohmann::json j;
  j["group_by"] = nlohmann::json::array();
  for (const auto& g : q.group_by) j["group_by"].push_back({{"hierarchy", g.hierarchy}, {"depth", g.depth}});
  j["filters"] = nlohmann::json::array();
  for (const auto& f : q.filters) {
    nlohmann::json jf{{"dim", f.dim}, {"depth", f.depth}, {"members", f.members}};
    if (f.tristate) jf["tristate"] = std::string(tri_state_label(*f.tristate));
    j["filters"].push_back(std::move(jf));
  }
  j["measures"] = q.measures;
  return j;
}

namespace {

TriState tristate_from_json(const nlohmann::json& v) {
  if (v.is_number_integer()) {
    const auto n = v.get<std::int64_t>();
    if (n == 1) return TriState::kYes;
    if (n == 0) return TriState::kNo;
    if (n == -9) return TriState::kUnknown;
  } else if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (iequals(s, "Yes")) return TriState::kYes;
    if (iequals(s, "No")) return TriState::kNo;
    if (iequals(s, "Unknown")) return TriState::kUnknown;
  }
  throw ParseError("tristate must be Yes, No, Unknown, 1, 0 or -9");
}

GroupBy level_from_json(const nlohmann::json& v, const char* name_key) {
  if (v.is_string()) return parse_level_ref(v.get<std::string>());
  if (!v.is_object() || !v.contains(name_key) || !v[name_key].is_string())
    throw ParseError(std::string("expected an object with a string '") + name_key + "'");
  const std::string name = v[name_key].get<std::string>();
  GroupBy g = parse_level_ref(name);
  if (v.contains("depth")) {
    if (!v["depth"].is_number_integer()) throw ParseError("depth must be an integer");
    g.depth = v["depth"].get<int>();
    check_depth(g.hierarchy, g.depth);
  }
  return g;
}

}  // namespace

CellQuery query_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("query must be a JSON object");
  CellQuery q;
  if (j.contains("group_by")) {
    if (!j["group_by"].is_array()) throw ParseError("group_by must be an array");
    for (const auto& g : j["group_by"]) q.group_by.push_back(level_from_json(g, "hierarchy"));
  }
  if (j.contains("filters")) {
    if (!j["filters"].is_array()) throw ParseError("filters must be an array");
    for (const auto& jf : j["filters"]) {
      const GroupBy ref = level_from_json(jf, "dim");
      Filter f{ref.hierarchy, ref.depth, {}, std::nullopt};
      if (jf.is_object() && jf.contains("members")) {
        if (!jf["members"].is_array()) throw ParseError("members must be an array");
        for (const auto& m : jf["members"]) {
          if (!m.is_string()) throw ParseError("members must be strings");
          f.members.push_back(m.get<std::string>());
        }
      }
      if (jf.is_object() && jf.contains("tristate") && !jf["tristate"].is_null())
        f.tristate = tristate_from_json(jf["tristate"]);
      q.filters.push_back(std::move(f));
    }
  }
  if (j.contains("measures")) {
    if (!j["measures"].is_array()) throw ParseError("measures must be an array");
    for (const auto& m : j["measures"]) {
      if (!m.is_string()) throw ParseError("measures must be strings");
      q.measures.push_back(m.get<std::string>());
    }
  }
  return q;
}

nlohmann::json result_to_json(const CellResult& r) {
  nlohmann::json j;
  j["axes"] = nlohmann::json::array();
  for (const auto& g : r.axes) j["axes"].push_back({{"hierarchy", g.hierarchy}, {"depth", g.depth}});
  j["measures"] = r.measures;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json values = nlohmann::json::object();
    for (std::size_t m = 0; m < r.measures.size(); ++m)
      values[r.measures[m]] = {
          {"sum", c.values[m].sum}, {"known", c.values[m].known}, {"unknown", c.values[m].unknown}};
    j["cells"].push_back({{"path", c.path}, {"values", std::move(values)}});
  }
  j["total"] = r.total;
  return j;
}

void write_result(std::ostream& out, const CellResult& r, char delimiter) {
  std::vector<std::string> header;
  for (const auto& g : r.axes) {
    const Hierarchy& h = find_hierarchy(g.hierarchy);
    for (int level = 0; level < g.depth; ++level) header.push_back(h.levels[static_cast<std::size_t>(level)].name);
  }
  for (const auto& m : r.measures) {
    header.push_back(m);
    header.push_back(m + "_known");
    header.push_back(m + "_unknown");
  }
  out << format_row(header, delimiter) << '\n';
  for (const auto& c : r.cells) {
    std::vector<std::string> row = c.path;
    for (const auto& v : c.values) {
      row.push_back(std::to_string(v.sum));
      row.push_back(std::to_string(v.known));
      row.push_back(std::to_string(v.unknown));
    }
    out << format_row(row, delimiter) << '\n';
  }
}

}  // namespace incube
