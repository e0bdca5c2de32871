// Reference implementations used by the unit and acceptance tests. They share
// no code with the library beyond the per-incident dimension functions and
// are written for obviousness, not speed.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "incube/codebook.hpp"
#include "incube/cube.hpp"
#include "incube/dimensions.hpp"
#include "incube/ingest.hpp"
#include "incube/mining.hpp"
#include "incube/synthetic.hpp"

namespace oracle {

using namespace incube;

// ---------------------------------------------------------------------------
// Fixtures.

// A record that passes validation: Bombing/Explosion with explosives, one
// private-citizen target, all criteria met.
inline Incident incident(int y, int m, int d, int seq, int country) {
  const auto& t = CodebookTables::builtin();
  Incident inc;
  inc.eventid = EventId{y, m, d, seq};
  inc.year = CodedCell::known(y);
  inc.month = CodedCell::known(m);
  inc.day = CodedCell::known(d);
  inc.extended = TriState::kNo;
  inc.country = country;
  inc.region = t.region_of_country(country);
  inc.crit1 = inc.crit2 = inc.crit3 = TriState::kYes;
  inc.doubtterr = TriState::kNo;
  inc.multiple = TriState::kNo;
  inc.success = TriState::kYes;
  inc.suicide = TriState::kNo;
  inc.attacktype[0] = 3;
  inc.targtype[0] = 14;
  inc.weaptype[0] = 6;
  inc.gname[0] = "Group A";
  inc.nkill = CodedCell::known(1);
  inc.nwound = CodedCell::known(2);
  return inc;
}

inline std::vector<Incident> corpus(std::uint64_t seed, std::size_t n) {
  return generate_synthetic(seed, n, GeneratorProfile{}, CodebookTables::builtin());
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("incube-test-" + std::to_string(std::random_device{}()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// ---------------------------------------------------------------------------
// Aggregation by linear scan.

inline const CodedCell* measure_field(const Incident& inc, const std::string& name) {
  if (name == "nkill") return &inc.nkill;
  if (name == "nwound") return &inc.nwound;
  if (name == "nkillus") return &inc.nkillus;
  if (name == "nkillter") return &inc.nkillter;
  if (name == "nwoundus") return &inc.nwoundus;
  if (name == "nwoundte") return &inc.nwoundte;
  if (name == "nperps") return &inc.nperps;
  if (name == "nperpcap") return &inc.nperpcap;
  if (name == "propvalue") return &inc.propvalue;
  if (name == "ransomamt") return &inc.ransomamt;
  if (name == "ransompaid") return &inc.ransompaid;
  if (name == "nhostkid") return &inc.nhostkid;
  if (name == "nreleased") return &inc.nreleased;
  return nullptr;  // incident_count
}

inline std::vector<std::string> prefix(const MemberPath& p, int depth) {
  return {p.members.begin(), p.members.begin() + depth};
}

// `q` must already use canonical hierarchy names and explicit measures.
inline CellResult scan(const std::vector<Incident>& incidents, const CellQuery& q) {
  const auto& tables = CodebookTables::builtin();
  std::map<std::vector<std::string>, std::vector<MeasureCell>> cells;
  CellResult r;
  r.axes = q.group_by;
  r.measures = q.measures;
  for (const auto& inc : incidents) {
    bool pass = true;
    for (const auto& f : q.filters) {
      std::vector<std::string> members = f.members;
      if (f.tristate) members.emplace_back(tri_state_label(*f.tristate));
      const MemberPath p = member_path(inc, find_hierarchy(f.dim), tables);
      const std::string& label = p.members[static_cast<std::size_t>(f.depth - 1)];
      if (std::find(members.begin(), members.end(), label) == members.end()) pass = false;
    }
    if (!pass) continue;
    ++r.total;
    std::vector<std::string> key;
    for (const auto& g : q.group_by) {
      const auto part = prefix(member_path(inc, find_hierarchy(g.hierarchy), tables), g.depth);
      key.insert(key.end(), part.begin(), part.end());
    }
    auto& values = cells[key];
    values.resize(q.measures.size());
    for (std::size_t m = 0; m < q.measures.size(); ++m) {
      const CodedCell* c = measure_field(inc, q.measures[m]);
      if (!c) {
        values[m].sum += 1;
        values[m].known += 1;
      } else if (c->is_known()) {
        values[m].sum += c->value();
        values[m].known += 1;
      } else {
        values[m].unknown += 1;
      }
    }
  }
  for (auto& [path, values] : cells) r.cells.push_back({path, values});
  return r;
}

// A random query whose filter members are drawn from the corpus itself.
inline CellQuery random_query(std::mt19937_64& rng, const std::vector<Incident>& incidents) {
  const auto& tables = CodebookTables::builtin();
  const auto& hs = standard_hierarchies();
  auto pick = [&](std::size_t n) {
    return static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  };

  CellQuery q;
  std::vector<std::size_t> order(hs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t axes = pick(4);
  for (std::size_t i = 0; i < axes; ++i) {
    const Hierarchy& h = hs[order[i]];
    q.group_by.push_back({h.name, static_cast<int>(pick(static_cast<std::size_t>(h.depth()))) + 1});
  }
  const std::size_t filters = pick(3);
  for (std::size_t i = 0; i < filters && !incidents.empty(); ++i) {
    const Hierarchy& h = hs[pick(hs.size())];
    const int depth = static_cast<int>(pick(static_cast<std::size_t>(h.depth()))) + 1;
    Filter f{h.name, depth, {}, std::nullopt};
    const std::size_t members = 1 + pick(3);
    for (std::size_t k = 0; k < members; ++k) {
      const Incident& inc = incidents[pick(incidents.size())];
      f.members.push_back(member_path(inc, h, tables).members[static_cast<std::size_t>(depth - 1)]);
    }
    std::sort(f.members.begin(), f.members.end());
    f.members.erase(std::unique(f.members.begin(), f.members.end()), f.members.end());
    q.filters.push_back(std::move(f));
  }
  const auto& catalog = measure_catalog();
  std::vector<std::size_t> ms(catalog.size());
  for (std::size_t i = 0; i < ms.size(); ++i) ms[i] = i;
  std::shuffle(ms.begin(), ms.end(), rng);
  const std::size_t measures = 1 + pick(4);
  for (std::size_t i = 0; i < measures; ++i) q.measures.push_back(catalog[ms[i]].name);
  return q;
}

// ---------------------------------------------------------------------------
// Association rules by exhaustive enumeration.

inline std::size_t count_containing(const std::vector<Transaction>& ts, const std::vector<std::string>& items) {
  std::size_t n = 0;
  for (const auto& t : ts) {
    bool all = true;
    for (const auto& i : items)
      if (std::find(t.items.begin(), t.items.end(), i) == t.items.end()) all = false;
    if (all) ++n;
  }
  return n;
}

inline std::vector<std::string> universe(const std::vector<Transaction>& ts) {
  std::set<std::string> u;
  for (const auto& t : ts) u.insert(t.items.begin(), t.items.end());
  return {u.begin(), u.end()};
}

inline std::vector<std::string> subset(const std::vector<std::string>& u, std::uint64_t mask) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < u.size(); ++i)
    if ((mask >> i) & 1u) out.push_back(u[i]);
  return out;
}

inline std::vector<FrequentItemset> itemsets(const std::vector<Transaction>& ts, double min_support) {
  std::vector<FrequentItemset> out;
  if (ts.empty()) return out;
  const auto u = universe(ts);
  const double n = static_cast<double>(ts.size());
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << u.size()); ++mask) {
    const auto s = subset(u, mask);
    const std::size_t c = count_containing(ts, s);
    if (static_cast<double>(c) / n >= min_support) out.push_back({s, c, static_cast<double>(c) / n});
  }
  std::sort(out.begin(), out.end(), [](const FrequentItemset& a, const FrequentItemset& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
    return a.items < b.items;
  });
  return out;
}

inline std::vector<AssociationRule> rules(const std::vector<Transaction>& ts, double min_support,
                                          double min_confidence) {
  std::vector<AssociationRule> out;
  if (ts.empty()) return out;
  const auto u = universe(ts);
  const double n = static_cast<double>(ts.size());
  const std::uint64_t full = std::uint64_t{1} << u.size();
  for (std::uint64_t a = 1; a < full; ++a) {
    for (std::uint64_t c = 1; c < full; ++c) {
      if (a & c) continue;
      const auto both = subset(u, a | c);
      const std::size_t n_both = count_containing(ts, both);
      if (static_cast<double>(n_both) / n < min_support) continue;
      const std::size_t n_a = count_containing(ts, subset(u, a));
      const std::size_t n_c = count_containing(ts, subset(u, c));
      const double conf = static_cast<double>(n_both) / static_cast<double>(n_a);
      if (conf < min_confidence) continue;
      out.push_back({subset(u, a), subset(u, c), n_both, static_cast<double>(n_both) / n, conf,
                     conf / (static_cast<double>(n_c) / n)});
    }
  }
  std::sort(out.begin(), out.end(), [](const AssociationRule& x, const AssociationRule& y) {
    if (x.count != y.count) return x.count > y.count;
    if (x.confidence != y.confidence) return x.confidence > y.confidence;
    if (x.antecedent != y.antecedent) return x.antecedent < y.antecedent;
    return x.consequent < y.consequent;
  });
  return out;
}

inline bool close(double a, double b, double rel = 1e-12) {
  return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

inline bool same_rules(const std::vector<AssociationRule>& a, const std::vector<AssociationRule>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].antecedent != b[i].antecedent || a[i].consequent != b[i].consequent || a[i].count != b[i].count)
      return false;
    if (!close(a[i].support, b[i].support) || !close(a[i].confidence, b[i].confidence) || !close(a[i].lift, b[i].lift))
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Sequential patterns by brute-force subsequence enumeration.

using Pattern = std::vector<Itemset>;

inline void all_subsequences(const std::vector<Itemset>& seq, std::size_t from, Pattern& current,
                             std::set<Pattern>& out) {
  for (std::size_t pos = from; pos < seq.size(); ++pos) {
    const Itemset& e = seq[pos];
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << e.size()); ++mask) {
      Itemset part;
      for (std::size_t i = 0; i < e.size(); ++i)
        if ((mask >> i) & 1u) part.push_back(e[i]);
      current.push_back(part);
      out.insert(current);
      all_subsequences(seq, pos + 1, current, out);
      current.pop_back();
    }
  }
}

inline std::vector<SequentialPattern> sequences(const std::vector<EntitySequence>& db, std::size_t min_support) {
  std::map<Pattern, std::size_t> counts;
  for (const auto& s : db) {
    std::vector<Itemset> events = s.events;
    for (auto& e : events) {
      std::sort(e.begin(), e.end());
      e.erase(std::unique(e.begin(), e.end()), e.end());
    }
    std::set<Pattern> found;
    Pattern current;
    all_subsequences(events, 0, current, found);
    for (const auto& p : found) ++counts[p];
  }
  std::vector<SequentialPattern> out;
  for (const auto& [p, n] : counts)
    if (n >= min_support) out.push_back({p, n});
  std::sort(out.begin(), out.end(), [](const SequentialPattern& a, const SequentialPattern& b) {
    if (a.support != b.support) return a.support > b.support;
    if (a.item_count() != b.item_count()) return a.item_count() < b.item_count();
    return a.elements < b.elements;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Outlier scores computed by hand.

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::vector<double> robust_scores(const std::vector<double>& v) {
  const double med = median_of(v);
  std::vector<double> dev;
  for (double x : v) dev.push_back(std::fabs(x - med));
  const double mad = median_of(dev);
  std::vector<double> out;
  if (mad != 0) {
    for (double x : v) out.push_back((x - med) / (1.4826 * mad));
    return out;
  }
  double sum = 0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  for (double x : v) out.push_back(sd == 0 ? 0.0 : (x - mean) / sd);
  return out;
}

// ---------------------------------------------------------------------------
// Random mining inputs: up to 8 transactions over 6 items, up to 5 entities
// with up to 4 events over 3 items.

inline std::vector<Transaction> random_transactions(std::mt19937_64& rng) {
  const std::vector<std::string> items{"a", "b", "c", "d", "e", "f"};
  const int n = std::uniform_int_distribution<int>(0, 8)(rng);
  std::vector<Transaction> ts;
  for (int t = 0; t < n; ++t) {
    Transaction tx{"T" + std::to_string(t), {}};
    const auto mask = std::uniform_int_distribution<unsigned>(0, 63)(rng);
    for (std::size_t i = 0; i < items.size(); ++i)
      if ((mask >> i) & 1u) tx.items.push_back(items[i]);
    ts.push_back(tx);
  }
  return ts;
}

inline std::vector<EntitySequence> random_sequences(std::mt19937_64& rng) {
  const std::vector<std::string> items{"bomb", "armed", "kidnap"};
  const int entities = std::uniform_int_distribution<int>(0, 5)(rng);
  std::vector<EntitySequence> db;
  for (int e = 0; e < entities; ++e) {
    EntitySequence s{"E" + std::to_string(e), {}};
    const int steps = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int k = 0; k < steps; ++k) {
      Itemset set;
      const auto mask = std::uniform_int_distribution<unsigned>(1, 7)(rng);
      for (std::size_t i = 0; i < items.size(); ++i)
        if ((mask >> i) & 1u) set.push_back(items[i]);
      s.events.push_back(set);
    }
    db.push_back(s);
  }
  return db;
}

}  // namespace oracle
