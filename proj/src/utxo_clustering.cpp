#include "addrclust/utxo_clustering.hpp"

#include <algorithm>
#include <unordered_set>

namespace addrclust {

void AddressHistory::record(const UtxoTransaction& tx) {
  if (latest_ && tx.position < *latest_) {
    throw ContractError("address history recorded out of order at txid " + tx.txid);
  }
  latest_ = tx.position;
  for (const auto* side : {&tx.inputs, &tx.outputs}) {
    for (const auto& io : *side) first_seen_.try_emplace(io.address.str(), tx.position);
  }
}

bool AddressHistory::is_used(std::string_view address, const ChainPosition& at) const {
  auto it = first_seen_.find(address);
  return it != first_seen_.end() && it->second < at;
}

std::optional<ChainPosition> AddressHistory::first_seen(std::string_view address) const {
  auto it = first_seen_.find(address);
  if (it == first_seen_.end()) return std::nullopt;
  return it->second;
}

std::string_view to_string(AbstainReason reason) {
  switch (reason) {
    case AbstainReason::kCoinbase: return "coinbase";
    case AbstainReason::kSingleOutput: return "single_output";
    case AbstainReason::kSingleInput: return "single_input";
    case AbstainReason::kNoNewOutput: return "no_new_output";
    case AbstainReason::kMultipleNewOutputs: return "multiple_new_outputs";
    case AbstainReason::kRoundAmount: return "round_amount";
    case AbstainReason::kAddressOverlap: return "address_overlap";
  }
  return "unknown";
}

AbstainReason abstain_reason_from_string(std::string_view name) {
  for (int r = 0; r <= static_cast<int>(AbstainReason::kAddressOverlap); ++r) {
    if (to_string(static_cast<AbstainReason>(r)) == name) return static_cast<AbstainReason>(r);
  }
  throw ValueError("unknown abstain reason '" + std::string(name) + "'");
}

void cluster_transaction_inputs(const UtxoTransaction& tx, Partition& partition) {
  if (tx.coinbase || tx.inputs.empty()) {
    for (const auto& out : tx.outputs) partition.intern(out.address);
    return;
  }
  const auto first = partition.intern(tx.inputs.front().address);
  for (std::size_t i = 1; i < tx.inputs.size(); ++i) {
    partition.unite(first, partition.intern(tx.inputs[i].address), HeuristicTag::kCommonSpending,
                    tx.txid);
  }
  for (const auto& out : tx.outputs) partition.intern(out.address);
}

void cluster_common_spending(std::span<const UtxoTransaction> txs, Partition& partition) {
  for (const auto& tx : txs) cluster_transaction_inputs(tx, partition);
}

ChangeDecision infer_change_address(const UtxoTransaction& tx, const AddressHistory& history) {
  if (auto latest = history.latest(); latest && tx.position < *latest) {
    throw ContractError("address history is ahead of txid " + tx.txid);
  }
  ChangeDecision d{tx.txid, std::nullopt, std::nullopt};
  const auto abstain = [&](AbstainReason r) {
    d.reason = r;
    return d;
  };

  if (tx.coinbase) return abstain(AbstainReason::kCoinbase);
  if (tx.outputs.size() < 2) return abstain(AbstainReason::kSingleOutput);

  std::unordered_set<std::string_view> input_addresses;
  for (const auto& in : tx.inputs) input_addresses.insert(in.address.str());
  if (input_addresses.size() < 2) return abstain(AbstainReason::kSingleInput);

  const TxOutput* candidate = nullptr;
  std::size_t new_outputs = 0;
  for (const auto& out : tx.outputs) {
    if (!history.is_used(out.address.str(), tx.position)) {
      ++new_outputs;
      candidate = &out;
    }
  }
  if (new_outputs == 0) return abstain(AbstainReason::kNoNewOutput);
  if (new_outputs > 1) return abstain(AbstainReason::kMultipleNewOutputs);

  if (fractional_digits(candidate->value) <= kChangeMinFractionalDigits) {
    return abstain(AbstainReason::kRoundAmount);
  }

  const bool overlap = std::any_of(tx.outputs.begin(), tx.outputs.end(), [&](const TxOutput& o) {
    return input_addresses.contains(o.address.str());
  });
  if (overlap) return abstain(AbstainReason::kAddressOverlap);

  d.inferred = candidate->address;
  return d;
}

ChangeDecision ChangeScanner::step(const UtxoTransaction& tx, Partition& partition) {
  for (const auto& in : tx.inputs) partition.intern(in.address);
  for (const auto& out : tx.outputs) partition.intern(out.address);
  auto decision = infer_change_address(tx, history_);
  if (decision.inferred) {
    partition.unite(decision.inferred->str(), tx.inputs.front().address.str(),
                    HeuristicTag::kChange, tx.txid);
  }
  history_.record(tx);
  return decision;
}

std::vector<ChangeDecision> apply_change_heuristic(std::span<const UtxoTransaction> txs,
                                                   Partition& partition) {
  ChangeScanner scanner;
  std::vector<ChangeDecision> decisions;
  decisions.reserve(txs.size());
  for (const auto& tx : txs) decisions.push_back(scanner.step(tx, partition));
  return decisions;
}

}  // namespace addrclust
