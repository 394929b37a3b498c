#include "addrclust/synth.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace addrclust {

// ---------------------------------------------------------------------------
// Config

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw GenerationError("invalid generator config: " + what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

template <typename T>
T parse_unsigned(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw GenerationError("config key '" + key + "': expected unsigned integer, got '" + value + "'");
  }
  return out;
}

double parse_probability(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double p = 0;
  try {
    p = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) {
    throw GenerationError("config key '" + key + "': expected number, got '" + value + "'");
  }
  return p;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void GenConfig::validate() const {
  require(n_entities >= 1, "n_entities must be >= 1");
  require(wallets_per_entity >= 1, "wallets_per_entity must be >= 1");
  require(txs_per_block >= 2, "txs_per_block must be >= 2");
  require(decimals <= kMaxDecimals, "decimals must be <= 30");
  require(payment_round_decimals <= decimals, "payment_round_decimals must be <= decimals");
  require(change_min_fractional_digits >= 1 && change_min_fractional_digits <= decimals,
          "change_min_fractional_digits must be in [1, decimals]");
  require(change_min_fractional_digits > payment_round_decimals,
          "change_min_fractional_digits must exceed payment_round_decimals");
  require(max_deposits_per_customer >= 1, "max_deposits_per_customer must be >= 1");
  require(is_probability(change_rate), "change_rate must be in [0,1]");
  require(is_probability(adversarial_round_change_rate),
          "adversarial_round_change_rate must be in [0,1]");
  require(is_probability(address_reuse_rate), "address_reuse_rate must be in [0,1]");
  require(is_probability(fresh_payee_rate), "fresh_payee_rate must be in [0,1]");
  require(is_probability(gas_funding_rate), "gas_funding_rate must be in [0,1]");
}

void GenConfig::set(const std::string& key, const std::string& value) {
  if (key == "rng_seed") rng_seed = parse_unsigned<std::uint64_t>(key, value);
  else if (key == "n_entities") n_entities = parse_unsigned<std::uint64_t>(key, value);
  else if (key == "wallets_per_entity") wallets_per_entity = parse_unsigned<std::uint64_t>(key, value);
  else if (key == "n_transactions") n_transactions = parse_unsigned<std::uint64_t>(key, value);
  else if (key == "change_rate") change_rate = parse_probability(key, value);
  else if (key == "payment_round_decimals") payment_round_decimals = parse_unsigned<unsigned>(key, value);
  else if (key == "change_min_fractional_digits") change_min_fractional_digits = parse_unsigned<unsigned>(key, value);
  else if (key == "adversarial_round_change_rate") adversarial_round_change_rate = parse_probability(key, value);
  else if (key == "address_reuse_rate") address_reuse_rate = parse_probability(key, value);
  else if (key == "decimals") decimals = parse_unsigned<unsigned>(key, value);
  else if (key == "txs_per_block") txs_per_block = parse_unsigned<std::uint64_t>(key, value);
  else if (key == "fresh_payee_rate") fresh_payee_rate = parse_probability(key, value);
  else if (key == "noise_wallets") noise_wallets = parse_unsigned<std::uint64_t>(key, value);
  else if (key == "max_deposits_per_customer") max_deposits_per_customer = parse_unsigned<std::uint64_t>(key, value);
  else if (key == "gas_funding_rate") gas_funding_rate = parse_probability(key, value);
  else throw GenerationError("unknown config key '" + key + "'");
}

GenConfig parse_gen_config(std::istream& in, GenConfig base) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw GenerationError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

// ---------------------------------------------------------------------------
// Rng

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw GenerationError("Rng::below(0)");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % n;
  }
}

bool Rng::chance(double p) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return u < p;
}

// ---------------------------------------------------------------------------
// Identifiers

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer; a bijection on 64-bit values.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string base58_fixed(std::uint64_t v) {
  static constexpr std::string_view kAlphabet =
      "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
  std::string out(11, '1');
  for (int i = 10; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kAlphabet[v % 58];
    v /= 58;
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class IdSource {
 public:
  explicit IdSource(std::uint64_t seed) : salt_(mix64(seed ^ kGolden)) {}

  // 12 characters, short enough for small-string storage.
  Address utxo_address() { return Address("1" + base58_fixed(mix64(salt_ ^ addresses_++))); }
  Address account_address() {
    const auto v = mix64(salt_ ^ addresses_++);
    return Address("0x" + hex64(v) + hex64(mix64(v)).substr(0, 8));
  }
  std::string txid() {
    const auto v = mix64(salt_ ^ ~txids_++);
    const auto w = mix64(v);
    return hex64(v) + hex64(w) + hex64(mix64(w)) + hex64(mix64(mix64(w)));
  }
  std::string account_hash() { return "0x" + txid(); }

 private:
  std::uint64_t salt_;
  std::uint64_t addresses_ = 0;
  std::uint64_t txids_ = 0;
};

std::string entity_name(std::uint64_t e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "entity-%04llu", static_cast<unsigned long long>(e));
  return buf;
}

// ---------------------------------------------------------------------------
// UTXO chain

struct Coin {
  Address address;
  uint128 value;
};

struct EntityState {
  std::vector<Address> wallets;
  std::uint64_t next_wallet = 0;
  std::vector<Coin> coins;
  std::vector<Address> used;         // addresses already on chain
  std::vector<Address> used_change;  // change addresses already on chain
};

constexpr std::uint64_t kCoinbaseOutputs = 4;
constexpr std::uint64_t kCoinbaseCoinsPerOutput = 10;

class UtxoGenerator {
 public:
  explicit UtxoGenerator(const GenConfig& cfg)
      : cfg_(cfg), rng_(cfg.rng_seed), ids_(cfg.rng_seed), entities_(cfg.n_entities) {
    for (std::uint64_t e = 0; e < cfg.n_entities; ++e) {
      for (std::uint64_t w = 0; w < cfg.wallets_per_entity; ++w) {
        entities_[e].wallets.push_back(ids_.utxo_address());
      }
    }
    payment_quantum_ = pow10(cfg.decimals - cfg.payment_round_decimals);
    change_unit_ = pow10(cfg.decimals - cfg.change_min_fractional_digits + 1);
    p3_unit_ = cfg.decimals >= kChangeMinFractionalDigits
                   ? pow10(cfg.decimals - kChangeMinFractionalDigits)
                   : 0;
  }

  UtxoChain run() {
    UtxoChain chain;
    chain.transactions.reserve(cfg_.n_transactions);
    chain.truth.transactions.reserve(cfg_.n_transactions);
    for (std::uint64_t t = 0; t < cfg_.n_transactions; ++t) {
      const ChainPosition pos{t / cfg_.txs_per_block, t % cfg_.txs_per_block};
      std::vector<std::uint64_t> funded;
      if (pos.tx_index != 0) {
        for (std::uint64_t e = 0; e < entities_.size(); ++e) {
          if (!entities_[e].coins.empty()) funded.push_back(e);
        }
      }
      if (funded.empty()) {
        emit_coinbase(pos, chain);
      } else {
        emit_payment(pos, funded[rng_.below(funded.size())], chain);
      }
    }
    for (auto& [addr, owner] : owners_) {
      chain.truth.addresses.emplace(addr, AddressTruth{entity_name(owner.first), owner.second});
    }
    return chain;
  }

 private:
  void note_owner(const Address& a, std::uint64_t entity, const char* role) {
    owners_.try_emplace(a, entity, role);
  }

  void mark_used(const Address& a, std::uint64_t entity) {
    if (used_.insert(a.str()).second) entities_[entity].used.push_back(a);
  }

  void emit_coinbase(const ChainPosition& pos, UtxoChain& chain) {
    const std::uint64_t e = coinbase_count_++ % entities_.size();
    auto& ent = entities_[e];
    UtxoTransaction tx{ids_.txid(), pos, true, {}, {}};
    const auto n_out = std::min<std::uint64_t>(kCoinbaseOutputs, ent.wallets.size());
    const uint128 value = uint128{kCoinbaseCoinsPerOutput} * pow10(cfg_.decimals);
    for (std::uint64_t i = 0; i < n_out; ++i) {
      const Address& a = ent.wallets[ent.next_wallet++ % ent.wallets.size()];
      tx.outputs.push_back({a, Amount{value, cfg_.decimals}});
      ent.coins.push_back({a, value});
      note_owner(a, e, "wallet");
    }
    for (const auto& o : tx.outputs) mark_used(o.address, e);
    chain.truth.transactions.push_back({tx.txid, std::nullopt, std::nullopt, false});
    chain.transactions.push_back(std::move(tx));
  }

  void emit_payment(const ChainPosition& pos, std::uint64_t payer, UtxoChain& chain) {
    auto& ent = entities_[payer];

    // 1..3 inputs
    const std::uint64_t roll = rng_.below(100);
    std::uint64_t k = roll < 25 ? 1 : roll < 70 ? 2 : 3;
    k = std::min<std::uint64_t>(k, ent.coins.size());
    std::vector<Coin> spent;
    uint128 total = 0;
    for (std::uint64_t i = 0; i < k; ++i) {
      const auto j = rng_.below(ent.coins.size());
      total += ent.coins[j].value;
      spent.push_back(std::move(ent.coins[j]));
      ent.coins[j] = std::move(ent.coins.back());
      ent.coins.pop_back();
    }

    std::uint64_t payee = payer;
    if (entities_.size() > 1) {
      payee = rng_.below(entities_.size() - 1);
      if (payee >= payer) ++payee;
    }
    auto& pay_ent = entities_[payee];
    const bool fresh_payee = rng_.chance(cfg_.fresh_payee_rate);
    Address payee_addr;
    if (fresh_payee || pay_ent.used.empty()) {
      payee_addr = ids_.utxo_address();
      note_owner(payee_addr, payee, "receive");
    } else {
      payee_addr = pay_ent.used[rng_.below(pay_ent.used.size())];
    }

    // Fixed draw order regardless of which branch is taken below.
    const bool wants_change = rng_.chance(cfg_.change_rate);
    const bool round_change = rng_.chance(cfg_.adversarial_round_change_rate);
    const bool reuse_change = rng_.chance(cfg_.address_reuse_rate);
    const std::uint64_t payment_draw = rng_.next();
    const std::uint64_t fee_draw = rng_.next();
    const std::uint64_t slot_draw = rng_.next();
    const std::uint64_t reuse_draw = rng_.next();

    uint128 payment = total;
    uint128 change = 0;
    const uint128 max_units = (total / 10 * 9) / payment_quantum_;
    if (wants_change && max_units >= 1) {
      const uint128 units = 1 + uint128{payment_draw} % max_units;
      payment = units * payment_quantum_;
      const uint128 rest = total - payment;
      if (round_change) {
        change = rest / payment_quantum_ * payment_quantum_;
      } else if (rest > 2 * change_unit_) {
        change = rest - (1 + uint128{fee_draw} % change_unit_);
        if (change % change_unit_ == 0) --change;
      }
      if (change == 0) payment = total;
    }

    UtxoTransaction tx{ids_.txid(), pos, false, {}, {}};
    for (const auto& c : spent) tx.inputs.push_back({c.address, Amount{c.value, cfg_.decimals}});

    ChangeTruth truth{tx.txid, std::nullopt, std::nullopt, false};
    const bool payee_was_used = used_.contains(payee_addr.str());
    TxOutput pay_out{payee_addr, Amount{payment, cfg_.decimals}};
    if (change == 0) {
      tx.outputs.push_back(pay_out);
    } else {
      Address change_addr;
      if (reuse_change && !ent.used_change.empty()) {
        change_addr = ent.used_change[reuse_draw % ent.used_change.size()];
      } else {
        change_addr = ids_.utxo_address();
        note_owner(change_addr, payer, "change");
      }
      const bool change_was_used = used_.contains(change_addr.str());
      const std::uint32_t slot = static_cast<std::uint32_t>(slot_draw % 2);
      TxOutput change_out{change_addr, Amount{change, cfg_.decimals}};
      if (slot == 0) {
        tx.outputs = {change_out, pay_out};
      } else {
        tx.outputs = {pay_out, change_out};
      }
      truth.change_index = slot;
      truth.change_address = change_addr;

      std::unordered_set<std::string> distinct_inputs;
      for (const auto& in : tx.inputs) distinct_inputs.insert(in.address.str());
      const bool overlap = distinct_inputs.contains(payee_addr.str()) ||
                           distinct_inputs.contains(change_addr.str());
      const bool non_round = p3_unit_ != 0 && change % p3_unit_ != 0;
      truth.eligible = distinct_inputs.size() >= 2 && payee_was_used && !change_was_used &&
                       non_round && !overlap;

      ent.coins.push_back({change_addr, change});
      if (!change_was_used) ent.used_change.push_back(change_addr);
    }
    pay_ent.coins.push_back({payee_addr, payment});

    mark_used(payee_addr, payee);
    if (truth.change_address) mark_used(*truth.change_address, payer);

    chain.truth.transactions.push_back(std::move(truth));
    chain.transactions.push_back(std::move(tx));
  }

  const GenConfig& cfg_;
  Rng rng_;
  IdSource ids_;
  std::vector<EntityState> entities_;
  std::unordered_set<std::string> used_;
  std::map<Address, std::pair<std::uint64_t, const char*>> owners_;
  std::uint64_t coinbase_count_ = 0;
  uint128 payment_quantum_ = 1;
  uint128 change_unit_ = 1;
  uint128 p3_unit_ = 0;
};

}  // namespace

UtxoChain generate_utxo_chain(const GenConfig& cfg) {
  cfg.validate();
  return UtxoGenerator(cfg).run();
}

// ---------------------------------------------------------------------------
// Account chain

namespace {

struct PendingTransfer {
  std::uint64_t block;
  std::uint64_t seq;
  AccountTransfer transfer;
};

std::string exchange_name(std::uint64_t e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "exchange-%02llu.com", static_cast<unsigned long long>(e));
  return buf;
}

}  // namespace

AccountChain generate_account_chain(const GenConfig& cfg) {
  cfg.validate();
  if (cfg.n_transactions > 0 && cfg.noise_wallets == 0) {
    throw GenerationError("account chain: noise transfers requested without noise wallets");
  }
  Rng rng(cfg.rng_seed);
  IdSource ids(cfg.rng_seed);
  AccountChain chain;

  const uint128 cent = cfg.decimals >= 2 ? pow10(cfg.decimals - 2) : 1;
  const uint128 sweep_fee = cfg.decimals >= 5 ? 42 * pow10(cfg.decimals - 5) : 1;
  const std::uint64_t customers = cfg.n_entities * cfg.wallets_per_entity;
  const std::uint64_t horizon = std::max<std::uint64_t>(
      16, (customers * cfg.max_deposits_per_customer + cfg.n_transactions) / 4);

  std::vector<PendingTransfer> pending;
  std::uint64_t seq = 0;
  const auto push = [&](std::uint64_t block, const Address& from, const Address& to,
                        uint128 value, std::string asset) {
    pending.push_back({block, seq++,
                       AccountTransfer{ids.account_hash(), {}, from, to,
                                       Amount{value, cfg.decimals}, std::move(asset)}});
  };

  std::vector<Address> deposit_addresses;
  std::vector<Address> customer_wallets;
  for (std::uint64_t e = 0; e < cfg.n_entities; ++e) {
    const std::string name = exchange_name(e);
    const Address hot = ids.account_address();
    chain.seeds.push_back({hot, name, Category::kExchange, "synthetic"});
    chain.truth.addresses.emplace(hot, AddressTruth{name, "hot_wallet"});

    for (std::uint64_t c = 0; c < cfg.wallets_per_entity; ++c) {
      const Address customer = ids.account_address();
      const Address deposit = ids.account_address();
      char cname[64];
      std::snprintf(cname, sizeof cname, "customer-%02llu-%04llu", static_cast<unsigned long long>(e),
                    static_cast<unsigned long long>(c));
      chain.truth.addresses.emplace(customer, AddressTruth{cname, "customer_wallet"});
      chain.truth.addresses.emplace(deposit, AddressTruth{name, "deposit_address"});
      customer_wallets.push_back(customer);
      deposit_addresses.push_back(deposit);

      const std::uint64_t n_deposits = 1 + rng.below(cfg.max_deposits_per_customer);
      for (std::uint64_t d = 0; d < n_deposits; ++d) {
        const std::uint64_t block = rng.below(horizon);
        const uint128 value =
            cent * (1 + uint128{rng.below(100000)}) + uint128{rng.next()} % cent + sweep_fee;
        const std::string asset = rng.chance(0.2) ? "ERC20:USDT" : "ETH";
        const bool gas = rng.chance(cfg.gas_funding_rate);
        const std::uint64_t delay = 1 + rng.below(20);
        push(block, customer, deposit, value, asset);
        if (gas) push(block, hot, deposit, sweep_fee, "ETH");
        push(block + delay, deposit, hot, value - sweep_fee, asset);
      }
    }
  }

  std::vector<Address> noise;
  for (std::uint64_t i = 0; i < cfg.noise_wallets; ++i) {
    noise.push_back(ids.account_address());
    char nname[32];
    std::snprintf(nname, sizeof nname, "noise-%04llu", static_cast<unsigned long long>(i));
    chain.truth.addresses.emplace(noise.back(), AddressTruth{nname, "noise_wallet"});
  }
  for (std::uint64_t t = 0; t < cfg.n_transactions; ++t) {
    const std::uint64_t block = rng.below(horizon);
    const Address& from = noise[rng.below(noise.size())];
    const std::uint64_t roll = rng.below(10);
    Address to;
    if (roll < 2 && !deposit_addresses.empty()) {
      to = deposit_addresses[rng.below(deposit_addresses.size())];
    } else if (roll < 3 && !customer_wallets.empty()) {
      to = customer_wallets[rng.below(customer_wallets.size())];
    } else if (noise.size() > 1) {
      std::uint64_t j = rng.below(noise.size() - 1);
      if (noise[j] == from) j = noise.size() - 1;
      to = noise[j];
    } else {
      to = customer_wallets.empty() ? from : customer_wallets[rng.below(customer_wallets.size())];
    }
    push(block, from, to, cent * (1 + uint128{rng.below(5000)}), "ETH");
  }

  std::sort(pending.begin(), pending.end(), [](const PendingTransfer& a, const PendingTransfer& b) {
    return a.block != b.block ? a.block < b.block : a.seq < b.seq;
  });
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    if (i > 0 && pending[i].block != pending[i - 1].block) index = 0;
    pending[i].transfer.position = ChainPosition{pending[i].block, index++};
    chain.transfers.push_back(std::move(pending[i].transfer));
  }
  return chain;
}

// ---------------------------------------------------------------------------
// Evaluation

double ratio_or_one(std::uint64_t numerator, std::uint64_t denominator) {
  if (denominator == 0) return 1.0;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

namespace {

std::uint64_t pairs(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

}  // namespace

EvalReport evaluate(std::span<const Cluster> clusters, const GroundTruth& truth,
                    const std::vector<ChangeDecision>* decisions,
                    const std::vector<DepositInference>* inferences) {
  EvalReport report;

  auto& pw = report.pairwise;
  std::unordered_map<std::string_view, std::uint64_t> entity_totals;
  std::unordered_map<std::string_view, std::uint64_t> tally;
  for (const auto& cluster : clusters) {
    tally.clear();
    for (const auto& m : cluster.members) {
      auto it = truth.addresses.find(m);
      if (it == truth.addresses.end()) {
        throw ValueError("address " + m.str() + " missing from ground truth");
      }
      ++tally[it->second.entity];
      ++entity_totals[it->second.entity];
    }
    pw.same_cluster_pairs += pairs(cluster.members.size());
    for (const auto& [entity, n] : tally) pw.true_positive_pairs += pairs(n);
  }
  for (const auto& [entity, n] : entity_totals) pw.same_entity_pairs += pairs(n);
  pw.precision = ratio_or_one(pw.true_positive_pairs, pw.same_cluster_pairs);
  pw.recall = ratio_or_one(pw.true_positive_pairs, pw.same_entity_pairs);

  if (decisions) {
    ChangeMetrics cm;
    std::unordered_map<std::string_view, const ChangeTruth*> by_txid;
    for (const auto& t : truth.transactions) {
      by_txid.emplace(t.txid, &t);
      if (t.change_address) ++cm.truth_changes;
      if (t.eligible) ++cm.eligible;
    }
    for (const auto& d : *decisions) {
      if (!d.inferred) continue;
      ++cm.inferred;
      auto it = by_txid.find(d.txid);
      if (it == by_txid.end()) throw ValueError("txid " + d.txid + " missing from ground truth");
      const ChangeTruth& t = *it->second;
      if (t.change_address && *t.change_address == *d.inferred) {
        ++cm.correct;
        if (t.eligible) ++cm.eligible_found;
      }
    }
    cm.precision = ratio_or_one(cm.correct, cm.inferred);
    cm.recall = ratio_or_one(cm.correct, cm.truth_changes);
    cm.eligible_recall = ratio_or_one(cm.eligible_found, cm.eligible);
    report.change = cm;
  }

  if (inferences) {
    DepositMetrics dm;
    for (const auto& [addr, t] : truth.addresses) {
      if (t.role == "deposit_address") ++dm.truth_deposits;
    }
    for (const auto& d : *inferences) {
      if (!d.is_inferred()) continue;
      ++dm.inferred;
      auto it = truth.addresses.find(d.address);
      if (it == truth.addresses.end()) {
        throw ValueError("address " + d.address.str() + " missing from ground truth");
      }
      if (it->second.role == "deposit_address" && d.entity && it->second.entity == *d.entity) {
        ++dm.correct;
      }
    }
    dm.precision = ratio_or_one(dm.correct, dm.inferred);
    dm.recall = ratio_or_one(dm.correct, dm.truth_deposits);
    report.deposit = dm;
  }
  return report;
}

}  // namespace addrclust
