#include "addrclust/account_clustering.hpp"

#include <algorithm>

namespace addrclust {

ExchangeSeedSet ExchangeSeedSet::from_seeds(std::span<const SeedLabel> seeds) {
  ExchangeSeedSet set;
  for (const auto& s : seeds) {
    if (s.category == Category::kExchange) set.add(s.name, s.address);
  }
  return set;
}

void ExchangeSeedSet::add(const std::string& entity, const Address& wallet) {
  auto [it, inserted] = owner_.try_emplace(wallet.str(), entity);
  if (!inserted && it->second != entity) {
    throw ValueError("seed wallet " + wallet.str() + " claimed by both '" + it->second +
                     "' and '" + entity + "'");
  }
  wallets_[entity].insert(wallet);
}

const std::string* ExchangeSeedSet::entity_of(std::string_view address) const {
  auto it = owner_.find(std::string(address));
  return it == owner_.end() ? nullptr : &it->second;
}

std::string_view to_string(DepositRejectReason reason) {
  switch (reason) {
    case DepositRejectReason::kSendsElsewhere: return "sends_elsewhere";
    case DepositRejectReason::kMultiExchange: return "multi_exchange";
    case DepositRejectReason::kIsSeed: return "is_seed";
    case DepositRejectReason::kNoOutgoing: return "no_outgoing";
    case DepositRejectReason::kInsufficientSweeps: return "insufficient_sweeps";
  }
  return "unknown";
}

DepositRejectReason deposit_reject_reason_from_string(std::string_view name) {
  for (int r = 0; r <= static_cast<int>(DepositRejectReason::kInsufficientSweeps); ++r) {
    if (to_string(static_cast<DepositRejectReason>(r)) == name) {
      return static_cast<DepositRejectReason>(r);
    }
  }
  throw ValueError("unknown deposit reject reason '" + std::string(name) + "'");
}

namespace {

struct OutgoingSummary {
  std::uint64_t non_self = 0;
  std::uint64_t to_seed = 0;
  bool to_non_seed = false;
  std::set<std::string> entities;
};

}  // namespace

std::vector<DepositInference> infer_deposit_addresses(std::span<const AccountTransfer> transfers,
                                                      const ExchangeSeedSet& seeds,
                                                      std::uint64_t min_sweeps) {
  if (min_sweeps < 1) throw ValueError("min_sweeps must be at least 1");

  std::map<Address, OutgoingSummary> outgoing;
  for (const auto& t : transfers) {
    auto& s = outgoing[t.from];
    if (t.from == t.to) continue;
    ++s.non_self;
    if (const auto* entity = seeds.entity_of(t.to.str())) {
      ++s.to_seed;
      s.entities.insert(*entity);
    } else {
      s.to_non_seed = true;
    }
  }

  std::vector<DepositInference> out;
  out.reserve(outgoing.size());
  for (const auto& [address, s] : outgoing) {
    DepositInference d{address, std::nullopt, s.to_seed, std::nullopt};
    if (const auto* entity = seeds.entity_of(address.str())) {
      d.entity = *entity;
      d.rejected = DepositRejectReason::kIsSeed;
    } else if (s.non_self == 0) {
      d.rejected = DepositRejectReason::kNoOutgoing;
    } else if (s.entities.size() >= 2) {
      d.rejected = DepositRejectReason::kMultiExchange;
    } else {
      if (s.entities.size() == 1) d.entity = *s.entities.begin();
      if (s.to_non_seed) {
        d.rejected = DepositRejectReason::kSendsElsewhere;
      } else if (s.to_seed < min_sweeps) {
        d.rejected = DepositRejectReason::kInsufficientSweeps;
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

void build_exchange_clusters(std::span<const DepositInference> inferences,
                             const ExchangeSeedSet& seeds, Partition& partition) {
  for (const auto& [entity, wallets] : seeds.entities()) {
    const auto& anchor = wallets.begin()->str();
    partition.intern(anchor);
    for (const auto& w : wallets) partition.unite(anchor, w.str(), HeuristicTag::kExchangeSeed, "");
  }
  for (const auto& d : inferences) {
    if (!d.is_inferred()) continue;
    auto it = d.entity ? seeds.entities().find(*d.entity) : seeds.entities().end();
    if (it == seeds.entities().end() || it->second.empty()) {
      throw ContractError("inferred deposit " + d.address.str() + " names entity '" +
                          d.entity.value_or("") + "' without seed wallets");
    }
    partition.unite(it->second.begin()->str(), d.address.str(), HeuristicTag::kGathering, "");
  }
}

}  // namespace addrclust
