#include "incube/mining.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "incube/dimensions.hpp"
#include "incube/error.hpp"
#include "incube/strings.hpp"

namespace incube {

const std::vector<std::string>& default_item_dimensions() {
  static const std::vector<std::string> dims = {"attack", "weapon", "targtype", "region", "suicide"};
  return dims;
}

namespace {

std::vector<std::string> canonical_dims(const std::vector<std::string>& dims) {
  std::vector<std::string> out;
  for (const auto& d : dims) {
    const std::string c = canonical_item_dimension(d);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<std::string> incident_items(const Incident& inc, const std::vector<std::string>& dims,
                                        const CodebookTables& tables) {
  std::vector<std::string> items;
  for (const auto& d : dims)
    for (const auto& m : slot_members(inc, d, tables)) items.push_back(d + "=" + m);
  sort_unique(items);
  return items;
}

bool item_in_dims(const std::string& item, const std::vector<std::string>& dims) {
  const auto eq = item.find('=');
  const std::string_view dim = std::string_view(item).substr(0, eq);
  return std::find(dims.begin(), dims.end(), dim) != dims.end();
}

std::vector<std::string> fact_items(const FactTable& table, std::size_t row, const std::vector<std::string>& dims) {
  std::vector<std::string> items;
  for (auto& item : table.items.row_items(row))
    if (item_in_dims(item, dims)) items.push_back(std::move(item));
  sort_unique(items);
  return items;
}

void check_fraction(double v, const char* what) {
  if (!(v > 0.0 && v <= 1.0)) throw MiningError(std::string(what) + " must be in (0, 1]");
}

void report(const ProgressFn& progress, double fraction) {
  if (progress) progress(fraction);
}

}  // namespace

std::vector<Transaction> build_transactions(std::span<const Incident> incidents, const std::vector<std::string>& dims,
                                            const CodebookTables& tables) {
  const auto cdims = canonical_dims(dims);
  std::vector<Transaction> out;
  out.reserve(incidents.size());
  for (const auto& inc : incidents) out.push_back({format_event_id(inc.eventid), incident_items(inc, cdims, tables)});
  return out;
}

std::vector<Transaction> transactions_from_facts(const FactTable& table, const std::vector<std::string>& dims) {
  const auto cdims = canonical_dims(dims);
  std::vector<Transaction> out;
  out.reserve(table.rows);
  for (std::size_t row = 0; row < table.rows; ++row)
    out.push_back({format_event_id(table.eventids[row]), fact_items(table, row, cdims)});
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using Ids = std::vector<std::uint32_t>;

struct Encoded {
  std::vector<std::string> names;  // sorted, so id order is label order
  std::vector<Ids> transactions;
};

Encoded encode(std::span<const Transaction> transactions) {
  Encoded e;
  for (const auto& t : transactions) e.names.insert(e.names.end(), t.items.begin(), t.items.end());
  sort_unique(e.names);
  for (const auto& t : transactions) {
    Ids ids;
    for (const auto& item : t.items)
      ids.push_back(
          static_cast<std::uint32_t>(std::lower_bound(e.names.begin(), e.names.end(), item) - e.names.begin()));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    e.transactions.push_back(std::move(ids));
  }
  return e;
}

bool frequent(std::size_t count, std::size_t n, double min_support) {
  return static_cast<double>(count) / static_cast<double>(n) >= min_support;
}

// Every frequent itemset with its count, keyed on sorted item ids.
std::map<Ids, std::size_t> apriori(const Encoded& e, double min_support, const ProgressFn& progress) {
  std::map<Ids, std::size_t> result;
  const std::size_t n = e.transactions.size();
  if (n == 0) return result;

  std::vector<std::size_t> single(e.names.size(), 0);
  for (const auto& t : e.transactions)
    for (auto id : t) ++single[id];
  std::vector<Ids> level;
  for (std::uint32_t id = 0; id < single.size(); ++id)
    if (frequent(single[id], n, min_support)) {
      level.push_back({id});
      result[{id}] = single[id];
    }

  std::size_t k = 1;
  while (!level.empty()) {
    report(progress, std::min(0.95, 1.0 - 1.0 / static_cast<double>(k + 1)));
    // Join itemsets sharing their first k-1 items; level is sorted.
    std::vector<Ids> candidates;
    for (std::size_t i = 0; i < level.size(); ++i) {
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        if (!std::equal(level[i].begin(), level[i].end() - 1, level[j].begin())) break;
        Ids c = level[i];
        c.push_back(level[j].back());
        bool all_frequent = true;
        for (std::size_t drop = 0; drop + 2 < c.size() && all_frequent; ++drop) {
          Ids sub;
          for (std::size_t x = 0; x < c.size(); ++x)
            if (x != drop) sub.push_back(c[x]);
          all_frequent = result.count(sub) != 0;
        }
        if (all_frequent) candidates.push_back(std::move(c));
      }
    }
    std::vector<std::size_t> counts(candidates.size(), 0);
    for (const auto& t : e.transactions) {
      if (t.size() < k + 1) continue;
      for (std::size_t c = 0; c < candidates.size(); ++c)
        if (std::includes(t.begin(), t.end(), candidates[c].begin(), candidates[c].end())) ++counts[c];
    }
    level.clear();
    for (std::size_t c = 0; c < candidates.size(); ++c)
      if (frequent(counts[c], n, min_support)) {
        result[candidates[c]] = counts[c];
        level.push_back(std::move(candidates[c]));
      }
    ++k;
  }
  return result;
}

std::vector<std::string> names_of(const Encoded& e, const Ids& ids) {
  std::vector<std::string> out;
  for (auto id : ids) out.push_back(e.names[id]);
  return out;
}

}  // namespace

std::vector<FrequentItemset> mine_frequent_itemsets(std::span<const Transaction> transactions, double min_support,
                                                    const ProgressFn& progress) {
  check_fraction(min_support, "min_support");
  const Encoded e = encode(transactions);
  const auto sets = apriori(e, min_support, progress);
  std::vector<FrequentItemset> out;
  const auto n = static_cast<double>(transactions.size());
  for (const auto& [ids, count] : sets) out.push_back({names_of(e, ids), count, static_cast<double>(count) / n});
  std::sort(out.begin(), out.end(), [](const FrequentItemset& a, const FrequentItemset& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
    return a.items < b.items;
  });
  report(progress, 1.0);
  return out;
}

std::vector<AssociationRule> mine_association_rules(std::span<const Transaction> transactions, double min_support,
                                                    double min_confidence, const ProgressFn& progress) {
  check_fraction(min_support, "min_support");
  check_fraction(min_confidence, "min_confidence");
  const Encoded e = encode(transactions);
  const auto sets = apriori(e, min_support, progress);
  const auto n = static_cast<double>(transactions.size());

  std::vector<AssociationRule> out;
  for (const auto& [ids, count] : sets) {
    if (ids.size() < 2) continue;
    const std::size_t k = ids.size();
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << k); ++mask) {
      Ids a, c;
      for (std::size_t x = 0; x < k; ++x) ((mask >> x) & 1u ? a : c).push_back(ids[x]);
      const std::size_t count_a = sets.at(a);
      const double confidence = static_cast<double>(count) / static_cast<double>(count_a);
      if (confidence < min_confidence) continue;
      const double support_c = static_cast<double>(sets.at(c)) / n;
      out.push_back(
          {names_of(e, a), names_of(e, c), count, static_cast<double>(count) / n, confidence, confidence / support_c});
    }
  }
  std::sort(out.begin(), out.end(), [](const AssociationRule& x, const AssociationRule& y) {
    if (x.count != y.count) return x.count > y.count;
    if (x.confidence != y.confidence) return x.confidence > y.confidence;
    if (x.antecedent != y.antecedent) return x.antecedent < y.antecedent;
    return x.consequent < y.consequent;
  });
  report(progress, 1.0);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<EntitySequence> group_sequences(std::map<std::string, std::vector<std::pair<EventId, Itemset>>> groups) {
  std::vector<EntitySequence> out;
  for (auto& [key, events] : groups) {
    std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    EntitySequence s{key, {}};
    for (auto& [id, items] : events) s.events.push_back(std::move(items));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<EntitySequence> build_sequences(std::span<const Incident> incidents,
                                            const std::vector<std::string>& key_dims,
                                            const std::vector<std::string>& item_dims, const CodebookTables& tables) {
  const auto keys = canonical_dims(key_dims);
  const auto items = canonical_dims(item_dims);
  if (keys.empty()) throw MiningError("sequence mining needs at least one key dimension");
  std::map<std::string, std::vector<std::pair<EventId, Itemset>>> groups;
  for (const auto& inc : incidents) {
    std::vector<std::string> parts;
    for (const auto& k : keys) {
      const auto members = slot_members(inc, k, tables);
      if (members.empty()) break;
      parts.push_back(members.front());
    }
    if (parts.size() != keys.size()) continue;
    Itemset set = incident_items(inc, items, tables);
    if (set.empty()) continue;
    groups[join(parts, " | ")].emplace_back(inc.eventid, std::move(set));
  }
  return group_sequences(std::move(groups));
}

std::vector<EntitySequence> sequences_from_facts(const FactTable& table, const std::vector<std::string>& key_dims,
                                                 const std::vector<std::string>& item_dims) {
  const auto keys = canonical_dims(key_dims);
  const auto items = canonical_dims(item_dims);
  if (keys.empty()) throw MiningError("sequence mining needs at least one key dimension");
  std::map<std::string, std::vector<std::pair<EventId, Itemset>>> groups;
  for (std::size_t row = 0; row < table.rows; ++row) {
    const auto all = table.items.row_items(row);  // slot order within each dimension
    std::vector<std::string> parts;
    for (const auto& k : keys) {
      const std::string prefix = k + "=";
      const auto it = std::find_if(all.begin(), all.end(), [&](const std::string& s) { return s.starts_with(prefix); });
      if (it == all.end()) break;
      parts.push_back(it->substr(prefix.size()));
    }
    if (parts.size() != keys.size()) continue;
    Itemset set = fact_items(table, row, items);
    if (set.empty()) continue;
    groups[join(parts, " | ")].emplace_back(table.eventids[row], std::move(set));
  }
  return group_sequences(std::move(groups));
}

std::size_t SequentialPattern::item_count() const {
  std::size_t n = 0;
  for (const auto& e : elements) n += e.size();
  return n;
}

bool contains_pattern(const std::vector<Itemset>& sequence, const std::vector<Itemset>& pattern) {
  std::size_t pos = 0;
  for (const auto& element : pattern) {
    while (pos < sequence.size() &&
           !std::includes(sequence[pos].begin(), sequence[pos].end(), element.begin(), element.end()))
      ++pos;
    if (pos == sequence.size()) return false;
    ++pos;
  }
  return true;
}

std::vector<SequentialPattern> mine_sequences(std::span<const EntitySequence> sequences, std::size_t min_support,
                                              const ProgressFn& progress) {
  if (min_support < 1) throw MiningError("min_support must be at least 1");

  std::vector<std::vector<Itemset>> db;
  for (const auto& s : sequences) {
    std::vector<Itemset> events = s.events;
    for (auto& e : events) sort_unique(e);
    db.push_back(std::move(events));
  }

  auto support_of = [&](const std::vector<Itemset>& pattern) {
    std::size_t n = 0;
    for (const auto& s : db)
      if (contains_pattern(s, pattern)) ++n;
    return n;
  };

  std::map<std::string, std::size_t> item_support;
  for (const auto& s : db) {
    std::set<std::string> seen;
    for (const auto& e : s) seen.insert(e.begin(), e.end());
    for (const auto& item : seen) ++item_support[item];
  }
  std::vector<std::string> items;
  for (const auto& [item, n] : item_support)
    if (n >= min_support) items.push_back(item);

  std::vector<SequentialPattern> out;
  std::vector<SequentialPattern> level;
  for (const auto& item : items) level.push_back({{{item}}, item_support[item]});
  std::size_t depth = 1;
  while (!level.empty()) {
    report(progress, std::min(0.95, 1.0 - 1.0 / static_cast<double>(depth + 1)));
    out.insert(out.end(), level.begin(), level.end());
    std::vector<SequentialPattern> next;
    for (const auto& p : level) {
      for (const auto& item : items) {
        // s-extension: a new final element.
        auto s_ext = p.elements;
        s_ext.push_back({item});
        if (const auto n = support_of(s_ext); n >= min_support) next.push_back({std::move(s_ext), n});
        // i-extension: grow the final element in label order.
        if (item > p.elements.back().back()) {
          auto i_ext = p.elements;
          i_ext.back().push_back(item);
          if (const auto n = support_of(i_ext); n >= min_support) next.push_back({std::move(i_ext), n});
        }
      }
    }
    level = std::move(next);
    ++depth;
  }

  std::sort(out.begin(), out.end(), [](const SequentialPattern& a, const SequentialPattern& b) {
    if (a.support != b.support) return a.support > b.support;
    if (a.item_count() != b.item_count()) return a.item_count() < b.item_count();
    return a.elements < b.elements;
  });
  report(progress, 1.0);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

std::vector<OutlierReport> score_outliers(std::span<const double> values, double threshold,
                                          const std::vector<std::string>& labels, const std::string& measure) {
  if (values.size() < 3) throw MiningError("outlier scoring needs at least three values");
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw MiningError("threshold must be positive");
  if (!labels.empty() && labels.size() != values.size()) throw MiningError("one label per value expected");
  for (double v : values)
    if (!std::isfinite(v)) throw MiningError("series values must be finite");

  const std::vector<double> v(values.begin(), values.end());
  const double med = median(v);
  std::vector<double> dev;
  for (double x : v) dev.push_back(std::fabs(x - med));
  const double mad = median(dev);

  std::vector<double> scores(v.size(), 0.0);
  std::string method = "robust_z";
  if (mad > 0) {
    for (std::size_t i = 0; i < v.size(); ++i) scores[i] = (v[i] - med) / (1.4826 * mad);
  } else {
    method = "stddev_z";
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    if (sd > 0)
      for (std::size_t i = 0; i < v.size(); ++i) scores[i] = (v[i] - mean) / sd;
  }

  std::vector<OutlierReport> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back({labels.empty() ? std::to_string(i) : labels[i], measure, v[i], scores[i],
                   std::fabs(scores[i]) > threshold, method});
  return out;
}

Series series_from_result(const CellResult& r, const std::string& measure) {
  const auto it = std::find(r.measures.begin(), r.measures.end(), measure);
  if (it == r.measures.end()) throw QueryError("measure '" + measure + "' is not in the result");
  const auto m = static_cast<std::size_t>(it - r.measures.begin());
  Series s;
  for (const auto& c : r.cells) {
    s.labels.push_back(c.path.empty() ? std::string("total") : join(c.path, "/"));
    s.values.push_back(static_cast<double>(c.values[m].sum));
  }
  return s;
}

}  // namespace incube
