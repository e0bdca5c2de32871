#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "incube/codebook.hpp"
#include "incube/cube.hpp"
#include "incube/ingest.hpp"

namespace incube {

// Receives the completed fraction of a long-running miner, in [0, 1].
using ProgressFn = std::function<void(double)>;

// ---------------------------------------------------------------------------
// Association rules.

struct Transaction {
  std::string id;
  std::vector<std::string> items;  // "dim=member", sorted, unique

  bool operator==(const Transaction&) const = default;
};

// attack, weapon, targtype, region, suicide.
const std::vector<std::string>& default_item_dimensions();

// One transaction per incident, id = event id. Throws LookupError for an
// unknown dimension.
std::vector<Transaction> build_transactions(std::span<const Incident> incidents, const std::vector<std::string>& dims,
                                            const CodebookTables& tables);
// Same items, read from the item store of a fact table.
std::vector<Transaction> transactions_from_facts(const FactTable& table, const std::vector<std::string>& dims);

struct FrequentItemset {
  std::vector<std::string> items;
  std::size_t count = 0;
  double support = 0;

  bool operator==(const FrequentItemset&) const = default;
};

struct AssociationRule {
  std::vector<std::string> antecedent;
  std::vector<std::string> consequent;
  std::size_t count = 0;  // transactions holding antecedent and consequent
  double support = 0;
  double confidence = 0;
  double lift = 0;

  bool operator==(const AssociationRule&) const = default;
};

// Itemsets with count / N >= min_support, ordered by support descending,
// size ascending, then items. Throws MiningError unless min_support is in
// (0, 1].
std::vector<FrequentItemset> mine_frequent_itemsets(std::span<const Transaction> transactions, double min_support,
                                                    const ProgressFn& progress = {});

// Ordered by support descending, confidence descending, then antecedent and
// consequent items. Throws MiningError unless both thresholds are in (0, 1].
std::vector<AssociationRule> mine_association_rules(std::span<const Transaction> transactions, double min_support,
                                                    double min_confidence, const ProgressFn& progress = {});

// ---------------------------------------------------------------------------
// Sequential patterns.

using Itemset = std::vector<std::string>;

struct EntitySequence {
  std::string key;
  std::vector<Itemset> events;  // in event id order

  bool operator==(const EntitySequence&) const = default;
};

// Groups incidents by the first known member of each key dimension (entities
// with an unknown key are left out) and orders each group by event id.
// Incidents contributing no item are skipped. Keys of several dimensions are
// joined with " | ". Sequences are ordered by key.
std::vector<EntitySequence> build_sequences(std::span<const Incident> incidents,
                                            const std::vector<std::string>& key_dims,
                                            const std::vector<std::string>& item_dims, const CodebookTables& tables);
std::vector<EntitySequence> sequences_from_facts(const FactTable& table, const std::vector<std::string>& key_dims,
                                                 const std::vector<std::string>& item_dims);

struct SequentialPattern {
  std::vector<Itemset> elements;
  std::size_t support = 0;  // entities whose sequence contains the pattern

  std::size_t item_count() const;
  bool operator==(const SequentialPattern&) const = default;
};

// True when `pattern` embeds in `sequence` in order, each element a subset of
// a distinct later event.
bool contains_pattern(const std::vector<Itemset>& sequence, const std::vector<Itemset>& pattern);

// All patterns with support >= min_support, ordered by support descending,
// item count ascending, then elements. Throws MiningError for
// min_support < 1.
std::vector<SequentialPattern> mine_sequences(std::span<const EntitySequence> sequences, std::size_t min_support,
                                              const ProgressFn& progress = {});

// ---------------------------------------------------------------------------
// Outliers.

struct OutlierReport {
  std::string label;
  std::string measure;
  double value = 0;
  double score = 0;
  bool flagged = false;
  std::string method;  // "robust_z" or "stddev_z"

  bool operator==(const OutlierReport&) const = default;
};

// (x - median) / (1.4826 * MAD); when MAD is zero, (x - mean) / s with the
// sample standard deviation s; all zero when s is zero. Flagged when
// |score| > threshold. Throws MiningError for fewer than three values or a
// non-positive threshold. Labels default to the value index.
std::vector<OutlierReport> score_outliers(std::span<const double> values, double threshold,
                                          const std::vector<std::string>& labels = {}, const std::string& measure = {});

struct Series {
  std::vector<std::string> labels;  // cell paths joined with "/"
  std::vector<double> values;
};

// Cell sums of one measure of an aggregate result.
Series series_from_result(const CellResult& r, const std::string& measure);

}  // namespace incube
