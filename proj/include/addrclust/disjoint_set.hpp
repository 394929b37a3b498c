#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "addrclust/core_model.hpp"

namespace addrclust {

/// Which heuristic justified a merge.
enum class HeuristicTag : std::uint8_t {
  kCommonSpending,
  kChange,
  kExchangeSeed,
  kGathering,
};

std::string_view to_string(HeuristicTag tag);
HeuristicTag heuristic_tag_from_string(std::string_view name);

struct MergeRecord {
  HeuristicTag tag;
  std::string txid;
  // Roots of the two clusters at the time of the merge.
  std::uint32_t left;
  std::uint32_t right;
};

/// A finalized cluster. Members are sorted bytewise; the representative is
/// the first member; heuristics lists the distinct tags of unions applied
/// within the cluster, in enum order.
struct Cluster {
  std::uint64_t cluster_id = 0;
  Address representative;
  std::vector<Address> members;
  std::vector<HeuristicTag> heuristics;
};

/// Union-find over interned addresses. Indices are dense and assigned in
/// first-intern order; parent and rank live in flat arrays.
class Partition {
 public:
  using Index = std::uint32_t;

  Index intern(std::string_view address);
  Index intern(const Address& address) { return intern(std::string_view(address.str())); }

  bool contains(std::string_view address) const;
  /// Throws std::out_of_range if the address was never interned.
  Index index_of(std::string_view address) const;

  const std::string& address_at(Index i) const { return *names_[i]; }
  std::size_t size() const noexcept { return parent_.size(); }

  Index find(Index i);
  Index find(std::string_view address) { return find(index_of(address)); }

  /// Joins the clusters of a and b, interning either if needed. Returns
  /// false if they were already in one cluster.
  bool unite(std::string_view a, std::string_view b, HeuristicTag tag, std::string_view txid);
  bool unite(Index a, Index b, HeuristicTag tag, std::string_view txid);

  bool same_cluster(std::string_view a, std::string_view b);

  const std::vector<MergeRecord>& merge_log() const noexcept { return merges_; }
  std::size_t cluster_count() const noexcept { return parent_.size() - merges_.size(); }

  /// Interns every address of `other` and replays its merge log. The
  /// finalized result equals building both inputs in one structure.
  void absorb(const Partition& other);

  std::vector<Cluster> finalize();

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::unordered_map<std::string, Index, Hash, std::equal_to<>> index_;
  std::vector<const std::string*> names_;
  std::vector<Index> parent_;
  std::vector<std::uint8_t> rank_;
  // Tag bitmask per root, covering every unite() call that touched the
  // cluster, so the finalized tags do not depend on union order.
  std::vector<std::uint8_t> tags_;
  std::vector<MergeRecord> merges_;
};

}  // namespace addrclust
