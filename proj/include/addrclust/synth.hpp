#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "addrclust/account_clustering.hpp"
#include "addrclust/core_model.hpp"
#include "addrclust/disjoint_set.hpp"
#include "addrclust/seed_label.hpp"
#include "addrclust/utxo_clustering.hpp"

namespace addrclust {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Generator knobs. Probabilities are in [0, 1]; entity and wallet counts
/// are at least 1. `wallets_per_entity` is the number of customers per
/// exchange for account chains; `n_transactions` counts every emitted UTXO
/// transaction, or the peer-to-peer noise transfers of an account chain.
struct GenConfig {
  std::uint64_t rng_seed = 0;
  std::uint64_t n_entities = 10;
  std::uint64_t wallets_per_entity = 4;
  std::uint64_t n_transactions = 1000;
  double change_rate = 0.8;
  unsigned payment_round_decimals = 2;
  unsigned change_min_fractional_digits = 5;
  double adversarial_round_change_rate = 0.0;
  double address_reuse_rate = 0.0;
  unsigned decimals = 8;

  // UTXO chains
  std::uint64_t txs_per_block = 10;
  double fresh_payee_rate = 0.1;

  // account chains
  std::uint64_t noise_wallets = 10;
  std::uint64_t max_deposits_per_customer = 1;
  double gas_funding_rate = 0.1;

  /// Throws GenerationError naming the offending field.
  void validate() const;

  /// Applies one `key=value` setting; keys are the field names above.
  void set(const std::string& key, const std::string& value);
};

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
GenConfig parse_gen_config(std::istream& in, GenConfig base = {});

/// Seeded mt19937_64 with portable, distribution-free sampling helpers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n); n must be non-zero.
  std::uint64_t below(std::uint64_t n);
  /// True with probability p, from the top 53 bits of one draw.
  bool chance(double p);

 private:
  std::mt19937_64 engine_;
};

struct AddressTruth {
  std::string entity;
  std::string role;

  friend bool operator==(const AddressTruth&, const AddressTruth&) = default;
};

struct ChangeTruth {
  std::string txid;
  std::optional<std::uint32_t> change_index;
  std::optional<Address> change_address;
  // Whether the true change output passes every one-time-change pattern.
  bool eligible = false;

  friend bool operator==(const ChangeTruth&, const ChangeTruth&) = default;
};

struct GroundTruth {
  std::map<Address, AddressTruth> addresses;
  std::vector<ChangeTruth> transactions;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct UtxoChain {
  std::vector<UtxoTransaction> transactions;
  GroundTruth truth;
};

struct AccountChain {
  std::vector<AccountTransfer> transfers;
  GroundTruth truth;
  std::vector<SeedLabel> seeds;
};

UtxoChain generate_utxo_chain(const GenConfig& cfg);
AccountChain generate_account_chain(const GenConfig& cfg);

struct PairwiseMetrics {
  std::uint64_t same_cluster_pairs = 0;
  std::uint64_t same_entity_pairs = 0;
  std::uint64_t true_positive_pairs = 0;
  double precision = 1.0;
  double recall = 1.0;
};

struct ChangeMetrics {
  std::uint64_t inferred = 0;
  std::uint64_t correct = 0;
  std::uint64_t truth_changes = 0;
  std::uint64_t eligible = 0;
  std::uint64_t eligible_found = 0;
  double precision = 1.0;
  double recall = 1.0;
  double eligible_recall = 1.0;
};

struct DepositMetrics {
  std::uint64_t inferred = 0;
  std::uint64_t correct = 0;
  std::uint64_t truth_deposits = 0;
  double precision = 1.0;
  double recall = 1.0;
};

struct EvalReport {
  PairwiseMetrics pairwise;
  std::optional<ChangeMetrics> change;
  std::optional<DepositMetrics> deposit;
};

/// numerator / denominator, with 1.0 when the denominator is zero.
double ratio_or_one(std::uint64_t numerator, std::uint64_t denominator);

/// Scores clusters against truth by tallying entity counts per cluster.
/// Change and deposit metrics are filled only when those inputs are given.
/// Throws ValueError for a clustered address missing from the truth.
EvalReport evaluate(std::span<const Cluster> clusters, const GroundTruth& truth,
                    const std::vector<ChangeDecision>* decisions = nullptr,
                    const std::vector<DepositInference>* inferences = nullptr);

}  // namespace addrclust
