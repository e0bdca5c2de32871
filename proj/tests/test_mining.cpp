#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "incube/error.hpp"
#include "incube/mining.hpp"
#include "oracles.hpp"

using namespace incube;

namespace {

const CodebookTables& tables() { return CodebookTables::builtin(); }

std::vector<Transaction> four() {
  return {{"T1", {"a", "b"}}, {"T2", {"a", "b"}}, {"T3", {"a", "c"}}, {"T4", {"b", "c"}}};
}

}  // namespace

TEST_CASE("four transaction example") {
  const auto ts = four();
  const auto sets = mine_frequent_itemsets(ts, 0.5);
  std::vector<std::vector<std::string>> items;
  for (const auto& s : sets) items.push_back(s.items);
  CHECK(items == std::vector<std::vector<std::string>>{{"a"}, {"b"}, {"c"}, {"a", "b"}});
  CHECK(sets[0].count == 3);
  CHECK(sets[2].support == 0.5);

  const auto rules = mine_association_rules(ts, 0.5, 0.6);
  REQUIRE(rules.size() == 2);
  CHECK(rules[0].antecedent == std::vector<std::string>{"a"});
  CHECK(rules[0].consequent == std::vector<std::string>{"b"});
  CHECK(rules[1].antecedent == std::vector<std::string>{"b"});
  CHECK(rules[1].consequent == std::vector<std::string>{"a"});
  for (const auto& r : rules) {
    CHECK(r.support == 0.5);
    CHECK(oracle::close(r.confidence, 2.0 / 3.0));
    CHECK(oracle::close(r.lift, (2.0 / 3.0) / 0.75));
  }
  CHECK(oracle::same_rules(rules, oracle::rules(ts, 0.5, 0.6)));
}

TEST_CASE("degenerate rule inputs") {
  CHECK(mine_association_rules({}, 0.5, 0.5).empty());
  CHECK(mine_frequent_itemsets({}, 0.5).empty());
  const std::vector<Transaction> same{{"1", {"x"}}, {"2", {"x"}}, {"3", {"x"}}};
  const auto sets = mine_frequent_itemsets(same, 1.0);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].items == std::vector<std::string>{"x"});
  CHECK(mine_association_rules(same, 1.0, 1.0).empty());
  for (double bad : {0.0, -0.1, 1.5, std::nan("")}) {
    CHECK_THROWS_AS(mine_association_rules(four(), bad, 0.5), MiningError);
    CHECK_THROWS_AS(mine_association_rules(four(), 0.5, bad), MiningError);
    CHECK_THROWS_AS(mine_frequent_itemsets(four(), bad), MiningError);
  }
}

TEST_CASE("apriori matches exhaustive enumeration") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 300; ++round) {
    const auto ts = oracle::random_transactions(rng);
    for (int k = 0; k < 20; ++k) {
      const double s = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
      const double c = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
      const auto got_sets = mine_frequent_itemsets(ts, s);
      const auto want_sets = oracle::itemsets(ts, s);
      REQUIRE(got_sets.size() == want_sets.size());
      for (std::size_t i = 0; i < got_sets.size(); ++i) {
        CHECK(got_sets[i].items == want_sets[i].items);
        CHECK(got_sets[i].count == want_sets[i].count);
        CHECK(oracle::close(got_sets[i].support, want_sets[i].support));
      }
      CHECK(oracle::same_rules(mine_association_rules(ts, s, c), oracle::rules(ts, s, c)));
    }
  }
}

TEST_CASE("frequent itemsets are closed under subsets") {
  const auto ts = build_transactions(oracle::corpus(3, 1500), default_item_dimensions(), tables());
  const auto sets = mine_frequent_itemsets(ts, 0.05);
  REQUIRE_FALSE(sets.empty());
  std::set<std::vector<std::string>> found;
  for (const auto& s : sets) found.insert(s.items);
  for (const auto& s : sets) {
    const auto n = s.items.size();
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << n); ++mask)
      CHECK(found.count(oracle::subset(s.items, mask)) == 1);
  }
}

TEST_CASE("rule arithmetic reproduces from the transactions") {
  const auto ts = build_transactions(oracle::corpus(8, 1200), default_item_dimensions(), tables());
  const auto rules = mine_association_rules(ts, 0.05, 0.3);
  REQUIRE_FALSE(rules.empty());
  const double n = static_cast<double>(ts.size());
  for (const auto& r : rules) {
    std::vector<std::string> both = r.antecedent;
    both.insert(both.end(), r.consequent.begin(), r.consequent.end());
    std::sort(both.begin(), both.end());
    const double n_both = static_cast<double>(oracle::count_containing(ts, both));
    const double n_a = static_cast<double>(oracle::count_containing(ts, r.antecedent));
    const double n_c = static_cast<double>(oracle::count_containing(ts, r.consequent));
    CHECK(static_cast<double>(r.count) == n_both);
    CHECK(oracle::close(r.support, n_both / n));
    CHECK(oracle::close(r.confidence, n_both / n_a));
    CHECK(oracle::close(r.lift, (n_both / n_a) / (n_c / n)));
    CHECK(r.support >= 0.05);
    CHECK(r.confidence >= 0.3);
  }
  for (std::size_t i = 1; i < rules.size(); ++i) CHECK(rules[i - 1].count >= rules[i].count);
}

TEST_CASE("miner reports progress") {
  const auto ts = build_transactions(oracle::corpus(8, 300), default_item_dimensions(), tables());
  std::vector<double> seen;
  mine_association_rules(ts, 0.1, 0.5, [&](double p) { seen.push_back(p); });
  REQUIRE_FALSE(seen.empty());
  CHECK(seen.back() == 1.0);
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i - 1] <= seen[i]);
}

TEST_CASE("transactions take every populated slot") {
  Incident inc = oracle::incident(1993, 7, 25, 1, 92);
  inc.attacktype = {3, 2, std::nullopt};
  const auto ts = build_transactions(std::span(&inc, 1), {"attack", "region"}, tables());
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].id == "199307250001");
  CHECK(ts[0].items ==
        std::vector<std::string>{"attack=Armed Assault", "attack=Bombing/Explosion", "region=South Asia"});

  Incident blank = oracle::incident(1993, 7, 25, 2, 92);
  blank.attacktype = {9, std::nullopt, std::nullopt};
  blank.suicide = TriState::kUnknown;
  CHECK(build_transactions(std::span(&blank, 1), {"attack", "suicide"}, tables())[0].items.empty());
  CHECK_THROWS_AS(build_transactions(std::span(&inc, 1), {"colour"}, tables()), LookupError);
}

TEST_CASE("transactions agree with per-incident membership") {
  const auto incidents = oracle::corpus(7, 5);
  const auto ts = build_transactions(incidents, {"attack", "region"}, tables());
  REQUIRE(ts.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    std::vector<std::string> want;
    for (const auto& m : slot_members(incidents[i], "attack", tables())) want.push_back("attack=" + m);
    for (const auto& m : slot_members(incidents[i], "region", tables())) want.push_back("region=" + m);
    std::sort(want.begin(), want.end());
    CHECK(ts[i].items == want);
  }
}

TEST_CASE("transactions from a fact table equal transactions from incidents") {
  const auto incidents = oracle::corpus(31, 800);
  const FactTable t = build_facts(incidents, tables());
  for (const auto& dims : std::vector<std::vector<std::string>>{
           default_item_dimensions(), item_dimensions(), {"gname", "weapsubtype", "crit2"}})
    CHECK(transactions_from_facts(t, dims) == build_transactions(incidents, dims, tables()));
  CHECK_THROWS_AS(transactions_from_facts(t, {"colour"}), LookupError);
}

TEST_CASE("sequence example") {
  const std::vector<EntitySequence> db{
      {"E1", {{"bomb"}, {"assassin"}}}, {"E2", {{"bomb"}, {"assassin"}}}, {"E3", {{"bomb"}}}};
  const auto got = mine_sequences(db, 2);
  REQUIRE(got.size() == 3);
  CHECK(got[0] == SequentialPattern{{{"bomb"}}, 3});
  CHECK(got[1] == SequentialPattern{{{"assassin"}}, 2});
  CHECK(got[2] == SequentialPattern{{{"bomb"}, {"assassin"}}, 2});
  CHECK(mine_sequences({}, 1).empty());
  CHECK(mine_sequences(std::vector<EntitySequence>{db[0]}, 2).empty());
  CHECK_THROWS_AS(mine_sequences(db, 0), MiningError);
}

TEST_CASE("pattern containment") {
  const std::vector<Itemset> seq{{"a", "b"}, {"c"}, {"a"}};
  CHECK(contains_pattern(seq, {{"a"}, {"a"}}));
  CHECK(contains_pattern(seq, {{"a", "b"}, {"a"}}));
  CHECK(contains_pattern(seq, {{"b"}, {"c"}}));
  CHECK_FALSE(contains_pattern(seq, {{"c"}, {"b"}}));
  CHECK_FALSE(contains_pattern(seq, {{"a", "c"}}));
  CHECK_FALSE(contains_pattern(seq, {{"a"}, {"a"}, {"a"}}));
}

TEST_CASE("sequence mining matches brute-force subsequence counts") {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 400; ++round) {
    const auto db = oracle::random_sequences(rng);
    const auto min_support = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    CHECK(mine_sequences(db, min_support) == oracle::sequences(db, min_support));
  }
}

TEST_CASE("entity sequences follow event id order") {
  std::vector<Incident> v{oracle::incident(1994, 1, 1, 1, 92), oracle::incident(1993, 1, 1, 2, 92),
                          oracle::incident(1993, 1, 1, 1, 217)};
  v[0].attacktype[0] = 1;
  v[1].attacktype[0] = 2;
  v[2].gname[0] = "Group B";
  Incident unknown_key = oracle::incident(1995, 1, 1, 1, 92);
  unknown_key.gname[0] = "Unknown";
  v.push_back(unknown_key);
  const auto seqs = build_sequences(v, {"gname"}, {"attack"}, tables());
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[0].key == "Group A");
  CHECK(seqs[0].events == std::vector<Itemset>{{"attack=Armed Assault"}, {"attack=Assassination"}});
  CHECK(seqs[1].key == "Group B");
  const auto two = build_sequences(v, {"gname", "country"}, {"attack"}, tables());
  CHECK(two[0].key == "Group A | India");
  CHECK_THROWS_AS(build_sequences(v, {}, {"attack"}, tables()), MiningError);

  const auto incidents = oracle::corpus(17, 600);
  const FactTable t = build_facts(incidents, tables());
  CHECK(sequences_from_facts(t, {"gname"}, {"attack", "weapon"}) ==
        build_sequences(incidents, {"gname"}, {"attack", "weapon"}, tables()));
}

TEST_CASE("constant series scores zero") {
  const std::vector<double> v{5, 5, 5, 5};
  const auto r = score_outliers(v, 3);
  REQUIRE(r.size() == 4);
  for (const auto& o : r) {
    CHECK(o.score == 0);
    CHECK_FALSE(o.flagged);
    CHECK(o.method == "stddev_z");
  }
  CHECK(r[2].label == "2");
}

TEST_CASE("robust z flags the spike") {
  const std::vector<double> v{10, 12, 11, 13, 50};
  const auto r = score_outliers(v, 3, {"a", "b", "c", "d", "e"}, "nkill");
  const auto want = oracle::robust_scores(v);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(r[i].score == doctest::Approx(want[i]).epsilon(1e-12));
    CHECK(r[i].flagged == (i == 4));
    CHECK(r[i].method == "robust_z");
    CHECK(r[i].measure == "nkill");
  }
  CHECK(std::fabs(r[4].score - 25.63) < 0.01);
  CHECK(r[4].label == "e");
}

TEST_CASE("outlier input validation") {
  const std::vector<double> two{1, 2};
  CHECK_THROWS_AS(score_outliers(two, 3), MiningError);
  const std::vector<double> three{1, 2, 3};
  CHECK_THROWS_AS(score_outliers(three, 0), MiningError);
  CHECK_THROWS_AS(score_outliers(three, 3, {"a"}), MiningError);
  const std::vector<double> nan{1, std::nan(""), 3};
  CHECK_THROWS_AS(score_outliers(nan, 3), MiningError);
}

TEST_CASE("scores are translation covariant") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 100; ++round) {
    const int n = std::uniform_int_distribution<int>(3, 30)(rng);
    std::vector<double> v, shifted;
    const double c = std::uniform_int_distribution<int>(-1000, 1000)(rng);
    for (int i = 0; i < n; ++i) {
      const int x = std::uniform_int_distribution<int>(0, 3)(rng) == 0
                        ? std::uniform_int_distribution<int>(0, 5000)(rng)
                        : std::uniform_int_distribution<int>(0, 20)(rng);
      v.push_back(x);
      shifted.push_back(x + c);
    }
    const auto a = score_outliers(v, 3);
    const auto b = score_outliers(shifted, 3);
    const auto want = oracle::robust_scores(v);
    for (int i = 0; i < n; ++i) {
      CHECK(a[i].score == doctest::Approx(b[i].score).epsilon(1e-9));
      CHECK(a[i].flagged == b[i].flagged);
      CHECK(a[i].score == doctest::Approx(want[i]).epsilon(1e-12));
      CHECK(a[i].flagged == (std::fabs(a[i].score) > 3));
    }
  }
}

TEST_CASE("series from an aggregate result") {
  const auto incidents = oracle::corpus(4, 400);
  const FactTable t = build_facts(incidents, tables());
  const CellResult r = aggregate(t, {{{"space", 2}}, {}, {"incident_count", "nkill"}});
  const Series s = series_from_result(r, "nkill");
  REQUIRE(s.values.size() == r.cells.size());
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    CHECK(s.labels[i] == r.cells[i].path[0] + "/" + r.cells[i].path[1]);
    CHECK(s.values[i] == static_cast<double>(r.cells[i].values[1].sum));
  }
  const Series total = series_from_result(aggregate(t, {}), "incident_count");
  CHECK(total.labels == std::vector<std::string>{"total"});
  CHECK_THROWS_AS(series_from_result(r, "nwound"), QueryError);
}
