#include <algorithm>
#include <chrono>
#include <random>

#include "addrclust/disjoint_set.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace addrclust;

namespace {

using Edge = std::pair<std::string, std::string>;

std::vector<Edge> random_edges(std::mt19937_64& rng, int n_nodes, int n_edges) {
  std::vector<Edge> edges;
  for (int i = 0; i < n_edges; ++i) {
    edges.emplace_back("n" + std::to_string(rng() % n_nodes), "n" + std::to_string(rng() % n_nodes));
  }
  return edges;
}

struct Snapshot {
  std::vector<std::uint64_t> ids;
  std::vector<std::string> reps;
  std::vector<std::vector<std::string>> members;
  std::vector<std::vector<HeuristicTag>> tags;
  bool operator==(const Snapshot&) const = default;
};

Snapshot snapshot(std::vector<Cluster> clusters) {
  Snapshot s;
  for (const auto& c : clusters) {
    s.ids.push_back(c.cluster_id);
    s.reps.push_back(c.representative.str());
    std::vector<std::string> m;
    for (const auto& a : c.members) m.push_back(a.str());
    s.members.push_back(std::move(m));
    s.tags.push_back(c.heuristics);
  }
  return s;
}

}  // namespace

TEST_CASE("intern assigns dense stable indices") {
  Partition p;
  CHECK(p.intern("A") == 0);
  CHECK(p.intern("A") == 0);
  CHECK(p.intern("B") == 1);
  CHECK(p.size() == 2);
  CHECK(p.address_at(1) == "B");
  CHECK_THROWS_AS(p.index_of("C"), std::out_of_range);
}

TEST_CASE("interning 10^6 distinct addresses yields indices 0..10^6-1") {
  Partition p;
  constexpr std::uint32_t n = 1'000'000;
  bool dense = true;
  for (std::uint32_t i = 0; i < n; ++i) dense &= p.intern("addr" + std::to_string(i)) == i;
  CHECK(dense);
  CHECK(p.size() == n);
  CHECK(p.intern("addr999999") == n - 1);
}

TEST_CASE("unite joins clusters and logs only real merges") {
  Partition p;
  CHECK(p.unite("A", "B", HeuristicTag::kCommonSpending, "t1"));
  CHECK(p.find("A") == p.find("B"));
  CHECK_FALSE(p.unite("A", "A", HeuristicTag::kCommonSpending, "t2"));
  CHECK_FALSE(p.unite("B", "A", HeuristicTag::kCommonSpending, "t3"));
  REQUIRE(p.merge_log().size() == 1);
  CHECK(p.merge_log()[0].txid == "t1");
  CHECK(p.merge_log()[0].tag == HeuristicTag::kCommonSpending);
  CHECK(p.same_cluster("A", "B"));
  CHECK_FALSE(p.same_cluster("A", "Z"));
}

TEST_CASE("find is idempotent") {
  std::mt19937_64 rng(3);
  Partition p;
  for (const auto& [a, b] : random_edges(rng, 200, 150)) p.unite(a, b, HeuristicTag::kChange, "");
  for (Partition::Index i = 0; i < p.size(); ++i) REQUIRE(p.find(p.find(i)) == p.find(i));
}

TEST_CASE("random union sequences match BFS connected components") {
  std::mt19937_64 rng(1000);
  for (int round = 0; round < 10; ++round) {
    const auto edges = random_edges(rng, 800, 1000);
    Partition p;
    std::set<std::string> nodes;
    std::size_t merges = 0;
    for (const auto& [a, b] : edges) {
      nodes.insert(a);
      nodes.insert(b);
      merges += p.unite(a, b, HeuristicTag::kCommonSpending, "");
    }
    CHECK(oracle::groups_of(p.finalize()) == oracle::components(nodes, edges));
    CHECK(p.merge_log().size() == merges);
    CHECK(p.cluster_count() == p.size() - merges);
    CHECK(p.finalize().size() == p.cluster_count());
  }
}

TEST_CASE("finalize orders members, representatives and ids bytewise") {
  Partition p;
  p.intern("C");
  p.unite("B", "A", HeuristicTag::kCommonSpending, "t");
  const auto clusters = p.finalize();
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].cluster_id == 0);
  CHECK(clusters[0].representative.str() == "A");
  CHECK(clusters[0].members == std::vector<Address>{Address("A"), Address("B")});
  CHECK(clusters[0].heuristics == std::vector<HeuristicTag>{HeuristicTag::kCommonSpending});
  CHECK(clusters[1].cluster_id == 1);
  CHECK(clusters[1].representative.str() == "C");
  CHECK(clusters[1].heuristics.empty());

  Partition empty;
  CHECK(empty.finalize().empty());
}

TEST_CASE("property: finalize is invariant under permutations of the union sequence") {
  std::mt19937_64 rng(42);
  std::vector<std::tuple<std::string, std::string, HeuristicTag>> ops;
  for (const auto& [a, b] : random_edges(rng, 300, 250)) {
    ops.emplace_back(a, b, rng() % 2 ? HeuristicTag::kCommonSpending : HeuristicTag::kChange);
  }
  const auto build = [&](const auto& seq) {
    Partition p;
    for (const auto& [a, b, tag] : seq) p.unite(a, b, tag, "");
    return snapshot(p.finalize());
  };
  const auto reference = build(ops);
  for (int shuffle = 0; shuffle < 120; ++shuffle) {
    auto perm = ops;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (auto& [a, b, tag] : perm) {
      if (rng() % 2) std::swap(a, b);
    }
    REQUIRE(build(perm) == reference);
  }
}

TEST_CASE("property: every prefix partition refines the full partition") {
  std::mt19937_64 rng(9);
  const auto edges = random_edges(rng, 150, 200);
  Partition full;
  for (const auto& [a, b] : edges) full.unite(a, b, HeuristicTag::kCommonSpending, "");
  for (std::size_t cut = 0; cut <= edges.size(); cut += 25) {
    Partition prefix;
    for (std::size_t i = 0; i < cut; ++i) {
      prefix.unite(edges[i].first, edges[i].second, HeuristicTag::kCommonSpending, "");
    }
    for (const auto& c : prefix.finalize()) {
      for (const auto& m : c.members) REQUIRE(full.same_cluster(c.representative.str(), m.str()));
    }
  }
}

TEST_CASE("absorbing independently built shards equals single construction") {
  std::mt19937_64 rng(77);
  const auto edges = random_edges(rng, 500, 600);
  Partition single, left, right;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto tag = i % 3 ? HeuristicTag::kCommonSpending : HeuristicTag::kChange;
    single.unite(edges[i].first, edges[i].second, tag, "t" + std::to_string(i));
    (i < edges.size() / 2 ? left : right)
        .unite(edges[i].first, edges[i].second, tag, "t" + std::to_string(i));
  }
  left.absorb(right);
  CHECK(snapshot(left.finalize()) == snapshot(single.finalize()));
}

TEST_CASE("10^6 unions finish well under a second") {
  constexpr std::uint32_t n = 1'000'000;
  Partition p;
  for (std::uint32_t i = 0; i < n; ++i) p.intern("a" + std::to_string(i));
  std::mt19937_64 rng(5);
  const auto start = std::chrono::steady_clock::now();
  for (std::uint32_t i = 0; i < n; ++i) {
    p.unite(static_cast<Partition::Index>(rng() % n), static_cast<Partition::Index>(rng() % n),
            HeuristicTag::kCommonSpending, "");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("10^6 unions: " << secs << " s");
  CHECK(secs < 1.0);
  CHECK(p.cluster_count() == n - p.merge_log().size());
}
