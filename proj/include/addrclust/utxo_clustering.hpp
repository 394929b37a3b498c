#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "addrclust/core_model.hpp"
#include "addrclust/disjoint_set.hpp"

namespace addrclust {

/// First on-chain appearance of each address, maintained in scan order.
class AddressHistory {
 public:
  /// Records every input and output address of `tx`. Transactions must be
  /// recorded in non-decreasing position order.
  void record(const UtxoTransaction& tx);

  /// True iff `address` first appeared strictly before `at`.
  bool is_used(std::string_view address, const ChainPosition& at) const;

  std::optional<ChainPosition> first_seen(std::string_view address) const;
  std::optional<ChainPosition> latest() const { return latest_; }
  std::size_t size() const noexcept { return first_seen_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, ChainPosition, Hash, std::equal_to<>> first_seen_;
  std::optional<ChainPosition> latest_;
};

enum class AbstainReason {
  kCoinbase,
  kSingleOutput,
  kSingleInput,
  kNoNewOutput,
  kMultipleNewOutputs,
  kRoundAmount,
  kAddressOverlap,
};

std::string_view to_string(AbstainReason reason);
AbstainReason abstain_reason_from_string(std::string_view name);

struct ChangeDecision {
  std::string txid;
  std::optional<Address> inferred;     // set iff outcome is Inferred
  std::optional<AbstainReason> reason; // set iff outcome is Abstained

  bool is_inferred() const noexcept { return inferred.has_value(); }
  friend bool operator==(const ChangeDecision&, const ChangeDecision&) = default;
};

/// Common spending for one transaction.
void cluster_transaction_inputs(const UtxoTransaction& tx, Partition& partition);

/// Joins every non-coinbase transaction's input addresses into one cluster
/// (each input against the first). All input and output addresses are
/// interned in transaction order.
void cluster_common_spending(std::span<const UtxoTransaction> txs, Partition& partition);

/// Strict fractional-digit threshold a change amount must exceed.
inline constexpr unsigned kChangeMinFractionalDigits = 4;

/// Evaluates the one-time change patterns against `history`, which must
/// cover exactly the transactions before `tx`. Abstentions carry the first
/// failing check in order: coinbase, single_output, single_input,
/// no_new_output / multiple_new_outputs, round_amount, address_overlap.
ChangeDecision infer_change_address(const UtxoTransaction& tx, const AddressHistory& history);

/// Incremental form of apply_change_heuristic for streamed input.
class ChangeScanner {
 public:
  ChangeDecision step(const UtxoTransaction& tx, Partition& partition);
  const AddressHistory& history() const noexcept { return history_; }

 private:
  AddressHistory history_;
};

/// One sequential pass: decides each transaction, joins every inferred
/// change address with the transaction's first input, then records the
/// transaction into the history. Returns one decision per transaction.
std::vector<ChangeDecision> apply_change_heuristic(std::span<const UtxoTransaction> txs,
                                                   Partition& partition);

}  // namespace addrclust
