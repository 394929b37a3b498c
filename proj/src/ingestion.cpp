#include "addrclust/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "json.hpp"

namespace addrclust {

using nlohmann::json;
using nlohmann::ordered_json;

IngestError::IngestError(std::string source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message),
      source_(std::move(source)),
      line_(line) {}

namespace {

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

/// Field accessors that turn type mismatches into line-located errors.
class RecordView {
 public:
  RecordView(const json& obj, const std::string& source, std::size_t line)
      : obj_(obj), source_(source), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const { throw IngestError(source_, line_, msg); }

  const json& field(const char* key) const {
    auto it = obj_.find(key);
    if (it == obj_.end()) fail(std::string("missing field '") + key + "'");
    return *it;
  }
  bool has(const char* key) const { return obj_.contains(key); }

  std::string str(const char* key) const {
    const auto& v = field(key);
    if (!v.is_string()) fail(std::string("field '") + key + "': expected string");
    return v.get<std::string>();
  }
  std::optional<std::string> opt_str(const char* key) const {
    if (!has(key) || field(key).is_null()) return std::nullopt;
    return str(key);
  }
  std::uint64_t uint(const char* key) const {
    const auto& v = field(key);
    if (!v.is_number_unsigned()) fail(std::string("field '") + key + "': expected unsigned integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const char* key) const {
    const auto& v = field(key);
    if (!v.is_boolean()) fail(std::string("field '") + key + "': expected boolean");
    return v.get<bool>();
  }
  const json& array(const char* key) const {
    const auto& v = field(key);
    if (!v.is_array()) fail(std::string("field '") + key + "': expected array");
    return v;
  }
  Address address(const char* key) const { return to_address(str(key), key); }
  Address to_address(const std::string& s, const char* key) const {
    if (!Address::is_valid(s)) fail(std::string("field '") + key + "': invalid address '" + s + "'");
    return Address(s);
  }
  Amount amount(const std::string& text, unsigned decimals) const {
    try {
      return parse_amount(text, decimals);
    } catch (const ValueError& e) {
      fail(e.what());
    }
  }

 private:
  const json& obj_;
  const std::string& source_;
  std::size_t line_;
};

/// Reads the next non-blank line as a JSON object. Returns false at EOF.
bool next_object(std::istream& in, const std::string& source, std::size_t& line, json& out) {
  std::string text;
  while (std::getline(in, text)) {
    ++line;
    if (is_blank(text)) continue;
    try {
      out = json::parse(text);
    } catch (const json::parse_error& e) {
      throw IngestError(source, line, std::string("malformed JSON: ") + e.what());
    }
    if (!out.is_object()) throw IngestError(source, line, "expected a JSON object");
    return true;
  }
  if (in.bad()) throw IngestError(source, line, "read error");
  return false;
}

template <typename Fn>
void for_each_object(std::istream& in, const std::string& source, Fn&& fn) {
  std::size_t line = 0;
  json obj;
  while (next_object(in, source, line, obj)) fn(RecordView(obj, source, line));
}

std::vector<TxOutput> parse_io(const RecordView& r, const char* key, unsigned decimals) {
  std::vector<TxOutput> out;
  for (const auto& item : r.array(key)) {
    if (!item.is_object()) r.fail(std::string("field '") + key + "': expected objects");
    auto a = item.find("address");
    auto v = item.find("value");
    if (a == item.end() || !a->is_string() || v == item.end() || !v->is_string()) {
      r.fail(std::string("field '") + key + "': entries need string 'address' and 'value'");
    }
    out.push_back({r.to_address(a->get<std::string>(), key), r.amount(v->get<std::string>(), decimals)});
  }
  return out;
}

void check_order(const RecordView& r, std::optional<ChainPosition>& last, const ChainPosition& pos) {
  if (last && pos < *last) {
    r.fail("position (" + std::to_string(pos.block_height) + "," + std::to_string(pos.tx_index) +
           ") precedes previous record (" + std::to_string(last->block_height) + "," +
           std::to_string(last->tx_index) + ")");
  }
  last = pos;
}

}  // namespace

// ---------------------------------------------------------------------------
// Transactions and transfers

UtxoReader::UtxoReader(std::istream& in, unsigned decimals, std::string source)
    : in_(in), decimals_(decimals), source_(std::move(source)) {}

std::optional<UtxoTransaction> UtxoReader::next() {
  json obj;
  if (!next_object(in_, source_, line_, obj)) return std::nullopt;
  const RecordView r(obj, source_, line_);
  UtxoTransaction tx;
  tx.txid = r.str("txid");
  tx.position = {r.uint("block"), r.uint("index")};
  tx.coinbase = r.boolean("coinbase");
  tx.inputs = parse_io(r, "inputs", decimals_);
  tx.outputs = parse_io(r, "outputs", decimals_);
  if (auto why = validate(tx); !why.empty()) r.fail(why);
  if (!seen_.insert(tx.txid).second) r.fail("duplicate txid " + tx.txid);
  check_order(r, last_, tx.position);
  return tx;
}

TransferReader::TransferReader(std::istream& in, unsigned decimals, std::string source)
    : in_(in), decimals_(decimals), source_(std::move(source)) {}

std::optional<AccountTransfer> TransferReader::next() {
  json obj;
  if (!next_object(in_, source_, line_, obj)) return std::nullopt;
  const RecordView r(obj, source_, line_);
  AccountTransfer t;
  t.hash = r.str("hash");
  t.position = {r.uint("block"), r.uint("index")};
  t.from = r.address("from");
  t.to = r.address("to");
  t.amount = r.amount(r.str("value"), decimals_);
  t.asset = r.str("asset");
  if (!seen_.insert(t.hash).second) r.fail("duplicate hash " + t.hash);
  check_order(r, last_, t.position);
  return t;
}

std::vector<UtxoTransaction> load_utxo_stream(std::istream& in, unsigned decimals,
                                              const std::string& source) {
  UtxoReader reader(in, decimals, source);
  std::vector<UtxoTransaction> out;
  while (auto tx = reader.next()) out.push_back(std::move(*tx));
  return out;
}

std::vector<AccountTransfer> load_transfer_stream(std::istream& in, unsigned decimals,
                                                  const std::string& source) {
  TransferReader reader(in, decimals, source);
  std::vector<AccountTransfer> out;
  while (auto t = reader.next()) out.push_back(std::move(*t));
  return out;
}

namespace {

ordered_json io_json(const std::vector<TxOutput>& ios) {
  ordered_json arr = ordered_json::array();
  for (const auto& io : ios) {
    arr.push_back(ordered_json{{"address", io.address.str()}, {"value", format_amount(io.value)}});
  }
  return arr;
}

}  // namespace

void write_utxo_record(std::ostream& out, const UtxoTransaction& tx) {
  ordered_json j;
  j["txid"] = tx.txid;
  j["block"] = tx.position.block_height;
  j["index"] = tx.position.tx_index;
  j["coinbase"] = tx.coinbase;
  j["inputs"] = io_json(tx.inputs);
  j["outputs"] = io_json(tx.outputs);
  out << j.dump() << '\n';
}

void write_transfer_record(std::ostream& out, const AccountTransfer& t) {
  ordered_json j;
  j["hash"] = t.hash;
  j["block"] = t.position.block_height;
  j["index"] = t.position.tx_index;
  j["from"] = t.from.str();
  j["to"] = t.to.str();
  j["value"] = format_amount(t.amount);
  j["asset"] = t.asset;
  out << j.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Seed labels (CSV)

namespace {

std::vector<std::string> split_csv(const std::string& line, bool& ok) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  ok = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"' && fields.back().empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  if (quoted) ok = false;
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  return q + "\"";
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

}  // namespace

std::vector<SeedLabel> load_seed_labels(std::istream& in, const std::string& source,
                                        std::vector<std::string>* warnings) {
  std::string text;
  std::size_t line = 0;
  bool header_seen = false;
  std::map<Address, SeedLabel> by_address;
  while (std::getline(in, text)) {
    ++line;
    strip_cr(text);
    if (is_blank(text)) continue;
    if (!header_seen) {
      if (text != "address,name,category,source") {
        throw IngestError(source, line, "expected header 'address,name,category,source'");
      }
      header_seen = true;
      continue;
    }
    bool ok = true;
    auto f = split_csv(text, ok);
    if (!ok) throw IngestError(source, line, "unterminated quoted field");
    if (f.size() != 4) {
      throw IngestError(source, line, "expected 4 columns, found " + std::to_string(f.size()));
    }
    if (!Address::is_valid(f[0])) throw IngestError(source, line, "invalid address '" + f[0] + "'");
    if (f[1].empty()) throw IngestError(source, line, "empty entity name");
    bool recognized = true;
    const Category cat = category_from_string(f[2], &recognized);
    if (!recognized && warnings) {
      warnings->push_back(source + ":" + std::to_string(line) + ": unknown category '" + f[2] +
                          "' mapped to other");
    }
    SeedLabel label{Address(f[0]), f[1], cat, f[3]};
    auto [it, inserted] = by_address.try_emplace(label.address, label);
    if (!inserted && it->second.name != label.name) {
      throw IngestError(source, line, "conflicting labels for " + f[0] + ": '" + it->second.name +
                                          "' vs '" + label.name + "'");
    }
  }
  if (in.bad()) throw IngestError(source, line, "read error");
  std::vector<SeedLabel> out;
  out.reserve(by_address.size());
  for (auto& [addr, label] : by_address) out.push_back(std::move(label));
  return out;
}

void write_seed_labels(std::ostream& out, std::span<const SeedLabel> seeds) {
  out << "address,name,category,source\n";
  for (const auto& s : seeds) {
    out << csv_escape(s.address.str()) << ',' << csv_escape(s.name) << ','
        << csv_escape(std::string(to_string(s.category))) << ',' << csv_escape(s.source) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Cluster records

void write_cluster_record(std::ostream& out, const LabeledCluster& c) {
  ordered_json j;
  j["cluster_id"] = c.cluster_id;
  j["representative"] = c.representative.str();
  ordered_json members = ordered_json::array();
  for (const auto& m : c.members) members.push_back(m.str());
  j["addresses"] = std::move(members);
  if (c.label) {
    j["label"] = ordered_json{{"name", c.label->name}, {"category", to_string(c.label->category)}};
  } else {
    j["label"] = nullptr;
  }
  ordered_json tags = ordered_json::array();
  for (auto t : c.heuristics) tags.push_back(to_string(t));
  j["heuristics"] = std::move(tags);
  j["conflicts"] = c.conflicts;
  out << j.dump() << '\n';
}

std::vector<LabeledCluster> read_cluster_records(std::istream& in, const std::string& source) {
  std::vector<LabeledCluster> out;
  for_each_object(in, source, [&](const RecordView& r) {
    LabeledCluster c;
    c.cluster_id = r.uint("cluster_id");
    c.representative = r.address("representative");
    for (const auto& a : r.array("addresses")) {
      if (!a.is_string()) r.fail("field 'addresses': expected strings");
      c.members.push_back(r.to_address(a.get<std::string>(), "addresses"));
    }
    if (c.members.empty()) r.fail("cluster without addresses");
    const auto& label = r.field("label");
    if (!label.is_null()) {
      if (!label.is_object() || !label.contains("name") || !label["name"].is_string() ||
          !label.contains("category") || !label["category"].is_string()) {
        r.fail("field 'label': expected {name, category} or null");
      }
      c.label = EntityLabel{label["name"].get<std::string>(),
                            category_from_string(label["category"].get<std::string>())};
    }
    for (const auto& t : r.array("heuristics")) {
      if (!t.is_string()) r.fail("field 'heuristics': expected strings");
      try {
        c.heuristics.push_back(heuristic_tag_from_string(t.get<std::string>()));
      } catch (const ValueError& e) {
        r.fail(e.what());
      }
    }
    for (const auto& t : r.array("conflicts")) {
      if (!t.is_string()) r.fail("field 'conflicts': expected strings");
      c.conflicts.push_back(t.get<std::string>());
    }
    out.push_back(std::move(c));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Decisions and inferences

void write_change_decision(std::ostream& out, const ChangeDecision& d) {
  ordered_json j;
  j["txid"] = d.txid;
  j["outcome"] = d.inferred ? "inferred" : "abstained";
  j["address"] = d.inferred ? ordered_json(d.inferred->str()) : ordered_json(nullptr);
  j["reason"] = d.reason ? ordered_json(to_string(*d.reason)) : ordered_json(nullptr);
  out << j.dump() << '\n';
}

std::vector<ChangeDecision> read_change_decisions(std::istream& in, const std::string& source) {
  std::vector<ChangeDecision> out;
  for_each_object(in, source, [&](const RecordView& r) {
    ChangeDecision d;
    d.txid = r.str("txid");
    const auto outcome = r.str("outcome");
    if (outcome == "inferred") {
      auto a = r.opt_str("address");
      if (!a) r.fail("inferred decision without address");
      d.inferred = r.to_address(*a, "address");
    } else if (outcome == "abstained") {
      auto reason = r.opt_str("reason");
      if (!reason) r.fail("abstained decision without reason");
      try {
        d.reason = abstain_reason_from_string(*reason);
      } catch (const ValueError& e) {
        r.fail(e.what());
      }
    } else {
      r.fail("field 'outcome': expected inferred or abstained");
    }
    out.push_back(std::move(d));
  });
  return out;
}

void write_deposit_inference(std::ostream& out, const DepositInference& d) {
  ordered_json j;
  j["address"] = d.address.str();
  j["entity"] = d.entity ? ordered_json(*d.entity) : ordered_json(nullptr);
  j["outcome"] = d.is_inferred() ? "inferred" : "rejected";
  j["reason"] = d.rejected ? ordered_json(to_string(*d.rejected)) : ordered_json(nullptr);
  j["sweep_count"] = d.sweep_count;
  out << j.dump() << '\n';
}

std::vector<DepositInference> read_deposit_inferences(std::istream& in, const std::string& source) {
  std::vector<DepositInference> out;
  for_each_object(in, source, [&](const RecordView& r) {
    DepositInference d;
    d.address = r.address("address");
    d.entity = r.opt_str("entity");
    d.sweep_count = r.uint("sweep_count");
    const auto outcome = r.str("outcome");
    if (outcome == "rejected") {
      auto reason = r.opt_str("reason");
      if (!reason) r.fail("rejected inference without reason");
      try {
        d.rejected = deposit_reject_reason_from_string(*reason);
      } catch (const ValueError& e) {
        r.fail(e.what());
      }
    } else if (outcome != "inferred") {
      r.fail("field 'outcome': expected inferred or rejected");
    } else if (!d.entity) {
      r.fail("inferred deposit without entity");
    }
    out.push_back(std::move(d));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Ground truth and reports

void write_truth(std::ostream& out, const GroundTruth& truth) {
  for (const auto& [addr, t] : truth.addresses) {
    ordered_json j;
    j["address"] = addr.str();
    j["entity"] = t.entity;
    j["role"] = t.role;
    out << j.dump() << '\n';
  }
  for (const auto& t : truth.transactions) {
    ordered_json j;
    j["txid"] = t.txid;
    j["change_index"] = t.change_index ? ordered_json(*t.change_index) : ordered_json(nullptr);
    j["change_address"] =
        t.change_address ? ordered_json(t.change_address->str()) : ordered_json(nullptr);
    j["eligible"] = t.eligible;
    out << j.dump() << '\n';
  }
}

GroundTruth read_truth(std::istream& in, const std::string& source) {
  GroundTruth truth;
  for_each_object(in, source, [&](const RecordView& r) {
    if (r.has("address")) {
      auto addr = r.address("address");
      AddressTruth t{r.str("entity"), r.str("role")};
      if (!truth.addresses.emplace(addr, t).second) r.fail("duplicate truth for " + addr.str());
    } else if (r.has("txid")) {
      ChangeTruth t;
      t.txid = r.str("txid");
      const auto& idx = r.field("change_index");
      if (!idx.is_null()) {
        if (!idx.is_number_unsigned()) r.fail("field 'change_index': expected unsigned integer or null");
        t.change_index = idx.get<std::uint32_t>();
      }
      if (auto a = r.opt_str("change_address")) t.change_address = r.to_address(*a, "change_address");
      if (r.has("eligible")) t.eligible = r.boolean("eligible");
      truth.transactions.push_back(std::move(t));
    } else {
      r.fail("truth record needs 'address' or 'txid'");
    }
  });
  return truth;
}

void write_eval_report(std::ostream& out, const EvalReport& report) {
  ordered_json j;
  const auto& pw = report.pairwise;
  j["pairwise"] = ordered_json{{"precision", pw.precision},
                               {"recall", pw.recall},
                               {"true_positive_pairs", pw.true_positive_pairs},
                               {"same_cluster_pairs", pw.same_cluster_pairs},
                               {"same_entity_pairs", pw.same_entity_pairs}};
  if (report.change) {
    const auto& c = *report.change;
    j["change"] = ordered_json{{"precision", c.precision},
                               {"recall", c.recall},
                               {"eligible_recall", c.eligible_recall},
                               {"inferred", c.inferred},
                               {"correct", c.correct},
                               {"truth_changes", c.truth_changes},
                               {"eligible", c.eligible},
                               {"eligible_found", c.eligible_found}};
  }
  if (report.deposit) {
    const auto& d = *report.deposit;
    j["deposit"] = ordered_json{{"precision", d.precision},
                                {"recall", d.recall},
                                {"inferred", d.inferred},
                                {"correct", d.correct},
                                {"truth_deposits", d.truth_deposits}};
  }
  out << j.dump(2) << '\n';
}

unsigned read_chain_config(std::istream& in, const std::string& source) {
  std::string text;
  std::size_t line = 0;
  std::optional<unsigned> decimals;
  while (std::getline(in, text)) {
    ++line;
    if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    strip_cr(text);
    if (is_blank(text)) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw IngestError(source, line, "expected key=value");
    auto key = text.substr(0, eq);
    auto value = text.substr(eq + 1);
    key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
    value.erase(std::remove_if(value.begin(), value.end(), ::isspace), value.end());
    if (key != "decimals") continue;
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size() || v > kMaxDecimals) {
      throw IngestError(source, line, "decimals must be an integer in [0, 30]");
    }
    decimals = v;
  }
  if (!decimals) throw IngestError(source, line, "chain config lacks 'decimals'");
  return *decimals;
}

}  // namespace addrclust
