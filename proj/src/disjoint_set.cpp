#include "addrclust/disjoint_set.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace addrclust {

std::string_view to_string(HeuristicTag tag) {
  switch (tag) {
    case HeuristicTag::kCommonSpending: return "common_spending";
    case HeuristicTag::kChange: return "change";
    case HeuristicTag::kExchangeSeed: return "exchange_seed";
    case HeuristicTag::kGathering: return "gathering";
  }
  return "unknown";
}

HeuristicTag heuristic_tag_from_string(std::string_view name) {
  for (auto tag : {HeuristicTag::kCommonSpending, HeuristicTag::kChange,
                   HeuristicTag::kExchangeSeed, HeuristicTag::kGathering}) {
    if (to_string(tag) == name) return tag;
  }
  throw ValueError("unknown heuristic tag '" + std::string(name) + "'");
}

Partition::Index Partition::intern(std::string_view address) {
  if (auto it = index_.find(address); it != index_.end()) return it->second;
  if (parent_.size() >= std::numeric_limits<Index>::max()) {
    throw std::length_error("partition exceeds 2^32-1 addresses");
  }
  const auto idx = static_cast<Index>(parent_.size());
  auto [it, inserted] = index_.emplace(std::string(address), idx);
  names_.push_back(&it->first);
  parent_.push_back(idx);
  rank_.push_back(0);
  tags_.push_back(0);
  return idx;
}

bool Partition::contains(std::string_view address) const {
  return index_.find(address) != index_.end();
}

Partition::Index Partition::index_of(std::string_view address) const {
  auto it = index_.find(address);
  if (it == index_.end()) throw std::out_of_range("address not interned: " + std::string(address));
  return it->second;
}

Partition::Index Partition::find(Index i) {
  Index root = i;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[i] != root) {
    Index next = parent_[i];
    parent_[i] = root;
    i = next;
  }
  return root;
}

bool Partition::unite(std::string_view a, std::string_view b, HeuristicTag tag,
                      std::string_view txid) {
  const Index ia = intern(a);
  const Index ib = intern(b);
  return unite(ia, ib, tag, txid);
}

bool Partition::unite(Index a, Index b, HeuristicTag tag, std::string_view txid) {
  if (a == b) return false;
  Index ra = find(a);
  Index rb = find(b);
  const auto bit = static_cast<std::uint8_t>(1u << static_cast<unsigned>(tag));
  if (ra == rb) {
    tags_[ra] |= bit;
    return false;
  }
  merges_.push_back(MergeRecord{tag, std::string(txid), ra, rb});
  if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
  parent_[rb] = ra;
  if (rank_[ra] == rank_[rb]) ++rank_[ra];
  tags_[ra] |= static_cast<std::uint8_t>(tags_[rb] | bit);
  return true;
}

bool Partition::same_cluster(std::string_view a, std::string_view b) {
  if (a == b) return true;
  if (!contains(a) || !contains(b)) return false;
  return find(index_of(a)) == find(index_of(b));
}

void Partition::absorb(const Partition& other) {
  for (const auto* name : other.names_) intern(*name);
  for (const auto& m : other.merges_) {
    unite(*other.names_[m.left], *other.names_[m.right], m.tag, m.txid);
  }
  for (Index i = 0; i < other.parent_.size(); ++i) {
    if (other.parent_[i] == i && other.tags_[i] != 0) tags_[find(index_of(*other.names_[i]))] |= other.tags_[i];
  }
}

std::vector<Cluster> Partition::finalize() {
  const std::size_t n = parent_.size();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [this](Index a, Index b) { return *names_[a] < *names_[b]; });

  constexpr auto kUnassigned = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> cluster_of_root(n, kUnassigned);
  std::vector<Cluster> clusters;
  for (Index i : order) {
    const Index root = find(i);
    auto& slot = cluster_of_root[root];
    if (slot == kUnassigned) {
      slot = clusters.size();
      Cluster c;
      c.cluster_id = slot;
      c.representative = Address(*names_[i]);
      clusters.push_back(std::move(c));
    }
    clusters[slot].members.emplace_back(*names_[i]);
  }

  for (Index i = 0; i < n; ++i) {
    if (parent_[i] != i) continue;
    auto& c = clusters[cluster_of_root[i]];
    for (unsigned t = 0; t < 4; ++t) {
      if (tags_[i] & (1u << t)) c.heuristics.push_back(static_cast<HeuristicTag>(t));
    }
  }
  return clusters;
}

}  // namespace addrclust
