#include "addrclust/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "addrclust/account_clustering.hpp"
#include "addrclust/disjoint_set.hpp"
#include "addrclust/ingestion.hpp"
#include "addrclust/labeling.hpp"
#include "addrclust/synth.hpp"
#include "addrclust/utxo_clustering.hpp"
#include "json.hpp"

namespace addrclust {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// Input problem attributable to a file rather than a record.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path + ": cannot open for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError(path + ": cannot open for writing");
  return out;
}

void close_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw FileError(path + ": write failed");
}

std::string sha256_file(const std::string& path) {
  auto in = open_input(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

/// Collects what a command read and wrote, then emits `<primary>.manifest.json`.
class Manifest {
 public:
  explicit Manifest(std::string command)
      : command_(std::move(command)), started_(std::chrono::steady_clock::now()) {}

  void config(const std::string& key, const std::string& value) { config_[key] = value; }
  void input(const std::string& path) { inputs_.push_back(path); }
  void output(const std::string& path) { outputs_.push_back(path); }

  /// Refuses to run when an output path names one of the inputs.
  void check_disjoint() const {
    for (const auto& o : outputs_) {
      for (const auto& i : inputs_) {
        std::error_code ec;
        if (fs::exists(o) && fs::equivalent(o, i, ec)) {
          throw UsageError("output " + o + " would overwrite input " + i);
        }
      }
    }
  }

  void write(const std::string& primary) const {
    ordered_json j;
    j["command"] = command_;
    j["version"] = std::string(kVersion);
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : config_) cfg[k] = v;
    j["config"] = cfg;
    ordered_json ins = ordered_json::array();
    for (const auto& path : inputs_) ins.push_back({{"path", path}, {"sha256", sha256_file(path)}});
    j["inputs"] = ins;
    j["outputs"] = outputs_;
    j["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    const auto path = primary + ".manifest.json";
    auto out = open_output(path);
    out << j.dump(2) << '\n';
    close_output(out, path);
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point started_;
  std::map<std::string, std::string> config_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

std::vector<Cluster> to_clusters(std::vector<LabeledCluster> labeled) {
  std::vector<Cluster> out;
  out.reserve(labeled.size());
  for (auto& c : labeled) {
    out.push_back(Cluster{c.cluster_id, std::move(c.representative), std::move(c.members),
                          std::move(c.heuristics)});
  }
  return out;
}

std::vector<SeedLabel> load_seeds_file(const std::string& path, std::ostream& err) {
  auto in = open_input(path);
  std::vector<std::string> warnings;
  auto seeds = load_seed_labels(in, path, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return seeds;
}

// ---------------------------------------------------------------------------
// Generator flags shared by both synth commands.

struct GenFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd, bool account) {
    cmd->add_option("--config", config_file, "key=value generator config file");
    const std::vector<std::pair<std::string, std::string>> common = {
        {"--seed", "rng_seed"},
        {"--entities", "n_entities"},
        {"--wallets", "wallets_per_entity"},
        {"--txs", "n_transactions"},
        {"--decimals", "decimals"},
    };
    const std::vector<std::pair<std::string, std::string>> utxo = {
        {"--change-rate", "change_rate"},
        {"--payment-round-decimals", "payment_round_decimals"},
        {"--change-min-digits", "change_min_fractional_digits"},
        {"--adversarial-round-change-rate", "adversarial_round_change_rate"},
        {"--address-reuse-rate", "address_reuse_rate"},
        {"--txs-per-block", "txs_per_block"},
        {"--fresh-payee-rate", "fresh_payee_rate"},
    };
    const std::vector<std::pair<std::string, std::string>> acct = {
        {"--noise-wallets", "noise_wallets"},
        {"--max-deposits", "max_deposits_per_customer"},
        {"--gas-funding-rate", "gas_funding_rate"},
    };
    for (const auto* table : {&common, account ? &acct : &utxo}) {
      for (const auto& [flag, key] : *table) {
        cmd->add_option(flag, values[key], key);
      }
    }
  }

  GenConfig build(Manifest& manifest) const {
    GenConfig cfg;
    if (!config_file.empty()) {
      auto in = open_input(config_file);
      cfg = parse_gen_config(in, cfg);
      manifest.input(config_file);
    }
    for (const auto& [key, value] : values) {
      if (!value.empty()) cfg.set(key, value);
    }
    cfg.validate();
    return cfg;
  }
};

void record_config(Manifest& m, const GenConfig& c) {
  m.config("rng_seed", std::to_string(c.rng_seed));
  m.config("n_entities", std::to_string(c.n_entities));
  m.config("wallets_per_entity", std::to_string(c.wallets_per_entity));
  m.config("n_transactions", std::to_string(c.n_transactions));
  m.config("change_rate", std::to_string(c.change_rate));
  m.config("payment_round_decimals", std::to_string(c.payment_round_decimals));
  m.config("change_min_fractional_digits", std::to_string(c.change_min_fractional_digits));
  m.config("adversarial_round_change_rate", std::to_string(c.adversarial_round_change_rate));
  m.config("address_reuse_rate", std::to_string(c.address_reuse_rate));
  m.config("decimals", std::to_string(c.decimals));
  m.config("txs_per_block", std::to_string(c.txs_per_block));
  m.config("fresh_payee_rate", std::to_string(c.fresh_payee_rate));
  m.config("noise_wallets", std::to_string(c.noise_wallets));
  m.config("max_deposits_per_customer", std::to_string(c.max_deposits_per_customer));
  m.config("gas_funding_rate", std::to_string(c.gas_funding_rate));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blockchain address clustering and labeling", "addrclust"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::function<void()> action;

  // synth-utxo
  GenFlags utxo_gen;
  std::string su_out, su_truth;
  auto* synth_utxo = app.add_subcommand("synth-utxo", "Generate a UTXO chain with ground truth");
  utxo_gen.attach(synth_utxo, false);
  synth_utxo->add_option("--out", su_out, "transaction records (NDJSON)")->required();
  synth_utxo->add_option("--truth", su_truth, "ground truth records (NDJSON)")->required();
  synth_utxo->callback([&] {
    action = [&] {
      Manifest m("synth-utxo");
      const auto cfg = utxo_gen.build(m);
      record_config(m, cfg);
      m.output(su_out);
      m.output(su_truth);
      m.check_disjoint();
      const auto chain = generate_utxo_chain(cfg);
      auto txs = open_output(su_out);
      for (const auto& tx : chain.transactions) write_utxo_record(txs, tx);
      close_output(txs, su_out);
      auto truth = open_output(su_truth);
      write_truth(truth, chain.truth);
      close_output(truth, su_truth);
      m.write(su_out);
    };
  });

  // synth-account
  GenFlags acct_gen;
  std::string sa_out, sa_truth, sa_seeds;
  auto* synth_account =
      app.add_subcommand("synth-account", "Generate an account chain with exchange seeds");
  acct_gen.attach(synth_account, true);
  synth_account->add_option("--out", sa_out, "transfer records (NDJSON)")->required();
  synth_account->add_option("--truth", sa_truth, "ground truth records (NDJSON)")->required();
  synth_account->add_option("--seeds", sa_seeds, "hot-wallet seed labels (CSV)")->required();
  synth_account->callback([&] {
    action = [&] {
      Manifest m("synth-account");
      const auto cfg = acct_gen.build(m);
      record_config(m, cfg);
      m.output(sa_out);
      m.output(sa_truth);
      m.output(sa_seeds);
      m.check_disjoint();
      const auto chain = generate_account_chain(cfg);
      auto transfers = open_output(sa_out);
      for (const auto& t : chain.transfers) write_transfer_record(transfers, t);
      close_output(transfers, sa_out);
      auto truth = open_output(sa_truth);
      write_truth(truth, chain.truth);
      close_output(truth, sa_truth);
      auto seeds = open_output(sa_seeds);
      write_seed_labels(seeds, chain.seeds);
      close_output(seeds, sa_seeds);
      m.write(sa_out);
    };
  });

  // cluster-utxo
  std::string cu_txs, cu_out, cu_decisions;
  unsigned cu_decimals = 0;
  bool cu_no_change = false;
  auto* cluster_utxo = app.add_subcommand("cluster-utxo", "Cluster a UTXO transaction dump");
  cluster_utxo->add_option("--txs", cu_txs, "transaction records (NDJSON)")->required();
  cluster_utxo->add_option("--decimals", cu_decimals, "chain decimals (8 for Bitcoin-like)")
      ->required()
      ->check(CLI::Range(0u, kMaxDecimals));
  cluster_utxo->add_flag("--no-change-heuristic", cu_no_change, "common spending only");
  cluster_utxo->add_option("--out", cu_out, "cluster records (NDJSON)")->required();
  cluster_utxo->add_option("--decisions", cu_decisions, "change decisions (NDJSON)");
  cluster_utxo->callback([&] {
    action = [&] {
      Manifest m("cluster-utxo");
      m.config("decimals", std::to_string(cu_decimals));
      m.config("change_heuristic", cu_no_change ? "off" : "on");
      m.input(cu_txs);
      m.output(cu_out);
      if (!cu_decisions.empty()) m.output(cu_decisions);
      m.check_disjoint();

      Partition partition;
      {
        auto in = open_input(cu_txs);
        UtxoReader reader(in, cu_decimals, cu_txs);
        while (auto tx = reader.next()) cluster_transaction_inputs(*tx, partition);
      }
      std::optional<std::ofstream> decisions;
      if (!cu_decisions.empty()) decisions = open_output(cu_decisions);
      if (!cu_no_change) {
        auto in = open_input(cu_txs);
        UtxoReader reader(in, cu_decimals, cu_txs);
        ChangeScanner scanner;
        while (auto tx = reader.next()) {
          const auto d = scanner.step(*tx, partition);
          if (decisions) write_change_decision(*decisions, d);
        }
      }
      if (decisions) close_output(*decisions, cu_decisions);

      auto clusters = open_output(cu_out);
      for (const auto& c : partition.finalize()) write_cluster_record(clusters, unlabeled(c));
      close_output(clusters, cu_out);
      m.write(cu_out);
    };
  });

  // cluster-account
  std::string ca_transfers, ca_seeds, ca_out, ca_inferences;
  unsigned ca_decimals = 0;
  std::uint64_t ca_min_sweeps = 1;
  auto* cluster_account =
      app.add_subcommand("cluster-account", "Infer exchange deposit addresses and cluster them");
  cluster_account->add_option("--transfers", ca_transfers, "transfer records (NDJSON)")->required();
  cluster_account->add_option("--seeds", ca_seeds, "seed labels (CSV)")->required();
  cluster_account->add_option("--decimals", ca_decimals, "chain decimals (18 for Ethereum-like)")
      ->required()
      ->check(CLI::Range(0u, kMaxDecimals));
  cluster_account->add_option("--min-sweeps", ca_min_sweeps, "sweeps required per deposit address")
      ->check(CLI::PositiveNumber);
  cluster_account->add_option("--out", ca_out, "cluster records (NDJSON)")->required();
  cluster_account->add_option("--inferences", ca_inferences, "deposit inferences (NDJSON)")
      ->required();
  cluster_account->callback([&] {
    action = [&] {
      Manifest m("cluster-account");
      m.config("decimals", std::to_string(ca_decimals));
      m.config("min_sweeps", std::to_string(ca_min_sweeps));
      m.input(ca_transfers);
      m.input(ca_seeds);
      m.output(ca_out);
      m.output(ca_inferences);
      m.check_disjoint();

      const auto seeds = ExchangeSeedSet::from_seeds(load_seeds_file(ca_seeds, err));
      auto in = open_input(ca_transfers);
      const auto transfers = load_transfer_stream(in, ca_decimals, ca_transfers);
      const auto inferences = infer_deposit_addresses(transfers, seeds, ca_min_sweeps);

      Partition partition;
      for (const auto& t : transfers) {
        partition.intern(t.from);
        partition.intern(t.to);
      }
      build_exchange_clusters(inferences, seeds, partition);

      auto inf_out = open_output(ca_inferences);
      for (const auto& d : inferences) write_deposit_inference(inf_out, d);
      close_output(inf_out, ca_inferences);
      auto clusters = open_output(ca_out);
      for (const auto& c : partition.finalize()) write_cluster_record(clusters, unlabeled(c));
      close_output(clusters, ca_out);
      m.write(ca_out);
    };
  });

  // label
  std::string lb_clusters, lb_seeds, lb_out;
  auto* label = app.add_subcommand("label", "Propagate seed labels onto clusters");
  label->add_option("--clusters", lb_clusters, "cluster records (NDJSON)")->required();
  label->add_option("--seeds", lb_seeds, "seed labels (CSV)")->required();
  label->add_option("--out", lb_out, "labeled cluster records (NDJSON)")->required();
  label->callback([&] {
    action = [&] {
      Manifest m("label");
      m.input(lb_clusters);
      m.input(lb_seeds);
      m.output(lb_out);
      m.check_disjoint();
      const auto seeds = load_seeds_file(lb_seeds, err);
      auto in = open_input(lb_clusters);
      const auto clusters = to_clusters(read_cluster_records(in, lb_clusters));
      const auto labeled = propagate_labels(clusters, seeds);
      auto o = open_output(lb_out);
      for (const auto& c : labeled) write_cluster_record(o, c);
      close_output(o, lb_out);
      m.write(lb_out);
    };
  });

  // census
  std::string cs_labeled, cs_csv;
  std::uint64_t cs_top = 10;
  auto* census_cmd = app.add_subcommand("census", "Print the largest labeled clusters");
  census_cmd->add_option("--labeled", cs_labeled, "labeled cluster records (NDJSON)")->required();
  census_cmd->add_option("--top", cs_top, "number of labeled rows")->check(CLI::PositiveNumber);
  census_cmd->add_option("--csv", cs_csv, "also write category,name,num_addresses CSV");
  census_cmd->callback([&] {
    action = [&] {
      Manifest m("census");
      m.config("top", std::to_string(cs_top));
      m.input(cs_labeled);
      if (!cs_csv.empty()) m.output(cs_csv);
      m.check_disjoint();
      auto in = open_input(cs_labeled);
      const auto labeled = read_cluster_records(in, cs_labeled);
      const auto rows = census(labeled, cs_top);
      out << format_census_table(rows);
      if (!cs_csv.empty()) {
        auto o = open_output(cs_csv);
        o << format_census_csv(rows);
        close_output(o, cs_csv);
        m.write(cs_csv);
      }
    };
  });

  // eval
  std::string ev_clusters, ev_truth, ev_decisions, ev_inferences, ev_out;
  auto* eval = app.add_subcommand("eval", "Score clusters against generator ground truth");
  eval->add_option("--clusters", ev_clusters, "cluster records (NDJSON)")->required();
  eval->add_option("--truth", ev_truth, "ground truth records (NDJSON)")->required();
  eval->add_option("--decisions", ev_decisions, "change decisions (NDJSON)");
  eval->add_option("--inferences", ev_inferences, "deposit inferences (NDJSON)");
  eval->add_option("--out", ev_out, "evaluation report (JSON)")->required();
  eval->callback([&] {
    action = [&] {
      Manifest m("eval");
      m.input(ev_clusters);
      m.input(ev_truth);
      if (!ev_decisions.empty()) m.input(ev_decisions);
      if (!ev_inferences.empty()) m.input(ev_inferences);
      m.output(ev_out);
      m.check_disjoint();

      auto cin = open_input(ev_clusters);
      const auto clusters = to_clusters(read_cluster_records(cin, ev_clusters));
      auto tin = open_input(ev_truth);
      const auto truth = read_truth(tin, ev_truth);
      std::optional<std::vector<ChangeDecision>> decisions;
      if (!ev_decisions.empty()) {
        auto din = open_input(ev_decisions);
        decisions = read_change_decisions(din, ev_decisions);
      }
      std::optional<std::vector<DepositInference>> inferences;
      if (!ev_inferences.empty()) {
        auto iin = open_input(ev_inferences);
        inferences = read_deposit_inferences(iin, ev_inferences);
      }
      const auto report = evaluate(clusters, truth, decisions ? &*decisions : nullptr,
                                   inferences ? &*inferences : nullptr);
      auto o = open_output(ev_out);
      write_eval_report(o, report);
      close_output(o, ev_out);
      m.write(ev_out);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (action) action();
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const IngestError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const FileError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const GenerationError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const ValueError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace addrclust
