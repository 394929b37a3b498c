#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "addrclust/account_clustering.hpp"
#include "addrclust/core_model.hpp"
#include "addrclust/labeling.hpp"
#include "addrclust/seed_label.hpp"
#include "addrclust/synth.hpp"
#include "addrclust/utxo_clustering.hpp"

namespace addrclust {

/// Input validation failure, located at `source:line`.
class IngestError : public std::runtime_error {
 public:
  IngestError(std::string source, std::size_t line, const std::string& message);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// Single-pass reader over newline-delimited UTXO records. Holds one record
/// at a time plus the set of txids seen so far.
class UtxoReader {
 public:
  UtxoReader(std::istream& in, unsigned decimals, std::string source = "<input>");

  /// Next transaction, or nullopt at end of stream. Throws IngestError.
  std::optional<UtxoTransaction> next();
  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  unsigned decimals_;
  std::string source_;
  std::size_t line_ = 0;
  std::optional<ChainPosition> last_;
  std::unordered_set<std::string> seen_;
};

class TransferReader {
 public:
  TransferReader(std::istream& in, unsigned decimals, std::string source = "<input>");

  std::optional<AccountTransfer> next();
  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  unsigned decimals_;
  std::string source_;
  std::size_t line_ = 0;
  std::optional<ChainPosition> last_;
  std::unordered_set<std::string> seen_;
};

std::vector<UtxoTransaction> load_utxo_stream(std::istream& in, unsigned decimals,
                                              const std::string& source = "<input>");
std::vector<AccountTransfer> load_transfer_stream(std::istream& in, unsigned decimals,
                                                  const std::string& source = "<input>");

/// Loads `address,name,category,source` CSV. Exact duplicates collapse;
/// an address given two different names is an error. Unknown categories
/// become `other` and a message is appended to `warnings`. Sorted by address.
std::vector<SeedLabel> load_seed_labels(std::istream& in, const std::string& source = "<input>",
                                        std::vector<std::string>* warnings = nullptr);

void write_utxo_record(std::ostream& out, const UtxoTransaction& tx);
void write_transfer_record(std::ostream& out, const AccountTransfer& t);
void write_seed_labels(std::ostream& out, std::span<const SeedLabel> seeds);

void write_cluster_record(std::ostream& out, const LabeledCluster& c);
std::vector<LabeledCluster> read_cluster_records(std::istream& in,
                                                 const std::string& source = "<input>");

void write_change_decision(std::ostream& out, const ChangeDecision& d);
std::vector<ChangeDecision> read_change_decisions(std::istream& in,
                                                  const std::string& source = "<input>");

void write_deposit_inference(std::ostream& out, const DepositInference& d);
std::vector<DepositInference> read_deposit_inferences(std::istream& in,
                                                      const std::string& source = "<input>");

/// Address records (`address`, `entity`, `role`) followed by per-transaction
/// change records (`txid`, `change_index`, `change_address`, `eligible`).
void write_truth(std::ostream& out, const GroundTruth& truth);
GroundTruth read_truth(std::istream& in, const std::string& source = "<input>");

/// Pretty-printed JSON object.
void write_eval_report(std::ostream& out, const EvalReport& report);

/// Reads a `decimals=N` chain config (key=value lines, `#` comments).
unsigned read_chain_config(std::istream& in, const std::string& source = "<input>");

}  // namespace addrclust
