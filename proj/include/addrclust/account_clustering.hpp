#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "addrclust/core_model.hpp"
#include "addrclust/disjoint_set.hpp"
#include "addrclust/seed_label.hpp"

namespace addrclust {

/// Known hot/cold wallets per exchange entity. An address belongs to at
/// most one entity.
class ExchangeSeedSet {
 public:
  ExchangeSeedSet() = default;

  /// Keeps only exchange-category seeds. Throws ValueError when one address
  /// is claimed by two entities.
  static ExchangeSeedSet from_seeds(std::span<const SeedLabel> seeds);

  void add(const std::string& entity, const Address& wallet);

  /// Entity owning `address`, if it is a seed wallet.
  const std::string* entity_of(std::string_view address) const;

  const std::map<std::string, std::set<Address>>& entities() const noexcept { return wallets_; }
  bool empty() const noexcept { return wallets_.empty(); }

 private:
  std::map<std::string, std::set<Address>> wallets_;
  std::unordered_map<std::string, std::string> owner_;
};

enum class DepositRejectReason {
  kSendsElsewhere,
  kMultiExchange,
  kIsSeed,
  kNoOutgoing,
  kInsufficientSweeps,
};

std::string_view to_string(DepositRejectReason reason);
DepositRejectReason deposit_reject_reason_from_string(std::string_view name);

struct DepositInference {
  Address address;
  std::optional<std::string> entity;
  std::uint64_t sweep_count = 0;
  std::optional<DepositRejectReason> rejected;  // empty means Inferred

  bool is_inferred() const noexcept { return !rejected.has_value(); }
  friend bool operator==(const DepositInference&, const DepositInference&) = default;
};

/// Classifies every address with at least one outgoing transfer. An address
/// is an inferred deposit address of exchange X when every outgoing
/// non-self transfer (all assets pooled) lands on X's seed wallets, there
/// are at least `min_sweeps` of them, and the address is not itself a seed.
/// Output is sorted by address.
std::vector<DepositInference> infer_deposit_addresses(std::span<const AccountTransfer> transfers,
                                                      const ExchangeSeedSet& seeds,
                                                      std::uint64_t min_sweeps = 1);

/// Joins each entity's seed wallets (tag exchange_seed) and each inferred
/// deposit address with its entity's bytewise-smallest seed (tag gathering).
void build_exchange_clusters(std::span<const DepositInference> inferences,
                             const ExchangeSeedSet& seeds, Partition& partition);

}  // namespace addrclust
