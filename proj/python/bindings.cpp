#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "addrclust/account_clustering.hpp"
#include "addrclust/core_model.hpp"
#include "addrclust/disjoint_set.hpp"
#include "addrclust/ingestion.hpp"
#include "addrclust/labeling.hpp"
#include "addrclust/synth.hpp"
#include "addrclust/utxo_clustering.hpp"

namespace py = pybind11;
using namespace addrclust;

namespace {

py::object big_int(uint128 v) {
  return py::module_::import("builtins").attr("int")(py::str(to_string(v)));
}

py::list io_list(const std::vector<TxOutput>& ios) {
  py::list out;
  for (const auto& io : ios) out.append(py::make_tuple(io.address.str(), format_amount(io.value)));
  return out;
}

std::vector<std::string> names(const std::vector<Address>& addrs) {
  std::vector<std::string> out;
  out.reserve(addrs.size());
  for (const auto& a : addrs) out.push_back(a.str());
  return out;
}

std::vector<std::string> tag_names(const std::vector<HeuristicTag>& tags) {
  std::vector<std::string> out;
  for (auto t : tags) out.emplace_back(to_string(t));
  return out;
}

py::dict metrics_dict(const EvalReport& r) {
  py::dict d;
  d["pairwise"] = py::dict(py::arg("precision") = r.pairwise.precision,
                           py::arg("recall") = r.pairwise.recall,
                           py::arg("true_positive_pairs") = r.pairwise.true_positive_pairs,
                           py::arg("same_cluster_pairs") = r.pairwise.same_cluster_pairs,
                           py::arg("same_entity_pairs") = r.pairwise.same_entity_pairs);
  if (r.change) {
    d["change"] = py::dict(py::arg("precision") = r.change->precision,
                           py::arg("recall") = r.change->recall,
                           py::arg("eligible_recall") = r.change->eligible_recall,
                           py::arg("inferred") = r.change->inferred,
                           py::arg("correct") = r.change->correct);
  }
  if (r.deposit) {
    d["deposit"] = py::dict(py::arg("precision") = r.deposit->precision,
                            py::arg("recall") = r.deposit->recall,
                            py::arg("inferred") = r.deposit->inferred,
                            py::arg("correct") = r.deposit->correct);
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_addrclust, m) {
  m.doc() = "Address clustering heuristics for UTXO and account-based chains.";

  py::register_exception<ValueError>(m, "ValueError", PyExc_ValueError);
  py::register_exception<IngestError>(m, "IngestError", PyExc_ValueError);
  py::register_exception<GenerationError>(m, "GenerationError", PyExc_ValueError);

  py::class_<Amount>(m, "Amount")
      .def_property_readonly("base_units", [](const Amount& a) { return big_int(a.base_units); })
      .def_readonly("decimals", &Amount::decimals)
      .def("__str__", &format_amount)
      .def("__repr__", [](const Amount& a) {
        return "Amount('" + format_amount(a) + "', decimals=" + std::to_string(a.decimals) + ")";
      })
      .def("__eq__", [](const Amount& a, const Amount& b) { return a == b; })
      .def("__sub__", &checked_sub);

  m.def("parse_amount", &parse_amount, py::arg("text"), py::arg("decimals"));
  m.def("fractional_digits", &fractional_digits, py::arg("amount"));

  py::class_<UtxoTransaction>(m, "UtxoTransaction")
      .def_readonly("txid", &UtxoTransaction::txid)
      .def_property_readonly("block", [](const UtxoTransaction& t) { return t.position.block_height; })
      .def_property_readonly("index", [](const UtxoTransaction& t) { return t.position.tx_index; })
      .def_readonly("coinbase", &UtxoTransaction::coinbase)
      .def_property_readonly("inputs", [](const UtxoTransaction& t) { return io_list(t.inputs); })
      .def_property_readonly("outputs", [](const UtxoTransaction& t) { return io_list(t.outputs); });

  py::class_<AccountTransfer>(m, "AccountTransfer")
      .def_readonly("hash", &AccountTransfer::hash)
      .def_property_readonly("block", [](const AccountTransfer& t) { return t.position.block_height; })
      .def_property_readonly("index", [](const AccountTransfer& t) { return t.position.tx_index; })
      .def_property_readonly("sender", [](const AccountTransfer& t) { return t.from.str(); })
      .def_property_readonly("recipient", [](const AccountTransfer& t) { return t.to.str(); })
      .def_readonly("amount", &AccountTransfer::amount)
      .def_readonly("asset", &AccountTransfer::asset);

  m.def("load_utxo_transactions", [](const std::string& text, unsigned decimals) {
    std::istringstream in(text);
    return load_utxo_stream(in, decimals);
  }, py::arg("text"), py::arg("decimals"));
  m.def("load_transfers", [](const std::string& text, unsigned decimals) {
    std::istringstream in(text);
    return load_transfer_stream(in, decimals);
  }, py::arg("text"), py::arg("decimals"));

  py::class_<SeedLabel>(m, "SeedLabel")
      .def(py::init([](const std::string& address, const std::string& name,
                       const std::string& category, const std::string& source) {
             return SeedLabel{Address(address), name, category_from_string(category), source};
           }),
           py::arg("address"), py::arg("name"), py::arg("category") = "exchange",
           py::arg("source") = "")
      .def_property_readonly("address", [](const SeedLabel& s) { return s.address.str(); })
      .def_readonly("name", &SeedLabel::name)
      .def_property_readonly("category", [](const SeedLabel& s) { return std::string(to_string(s.category)); })
      .def_readonly("source", &SeedLabel::source);

  m.def("load_seed_labels", [](const std::string& text) {
    std::istringstream in(text);
    return load_seed_labels(in);
  }, py::arg("text"));

  py::class_<Cluster>(m, "Cluster")
      .def_readonly("cluster_id", &Cluster::cluster_id)
      .def_property_readonly("representative", [](const Cluster& c) { return c.representative.str(); })
      .def_property_readonly("addresses", [](const Cluster& c) { return names(c.members); })
      .def_property_readonly("heuristics", [](const Cluster& c) { return tag_names(c.heuristics); });

  py::class_<Partition>(m, "Partition")
      .def(py::init<>())
      .def("intern", [](Partition& p, const std::string& a) { return p.intern(std::string_view(a)); })
      .def("unite", [](Partition& p, const std::string& a, const std::string& b,
                       const std::string& tag, const std::string& txid) {
             return p.unite(a, b, heuristic_tag_from_string(tag), txid);
           },
           py::arg("a"), py::arg("b"), py::arg("tag") = "common_spending", py::arg("txid") = "")
      .def("same_cluster", [](Partition& p, const std::string& a, const std::string& b) {
        return p.same_cluster(a, b);
      })
      .def("__len__", &Partition::size)
      .def_property_readonly("cluster_count", &Partition::cluster_count)
      .def_property_readonly("merge_count", [](const Partition& p) { return p.merge_log().size(); })
      .def("finalize", &Partition::finalize);

  m.def("cluster_common_spending", [](const std::vector<UtxoTransaction>& txs, Partition& p) {
    cluster_common_spending(txs, p);
  }, py::arg("transactions"), py::arg("partition"));

  py::class_<ChangeDecision>(m, "ChangeDecision")
      .def_readonly("txid", &ChangeDecision::txid)
      .def_property_readonly("outcome", [](const ChangeDecision& d) {
        return d.inferred ? "inferred" : "abstained";
      })
      .def_property_readonly("address", [](const ChangeDecision& d) -> std::optional<std::string> {
        if (d.inferred) return d.inferred->str();
        return std::nullopt;
      })
      .def_property_readonly("reason", [](const ChangeDecision& d) -> std::optional<std::string> {
        if (d.reason) return std::string(to_string(*d.reason));
        return std::nullopt;
      });

  m.def("apply_change_heuristic", [](const std::vector<UtxoTransaction>& txs, Partition& p) {
    return apply_change_heuristic(txs, p);
  }, py::arg("transactions"), py::arg("partition"));

  py::class_<DepositInference>(m, "DepositInference")
      .def_property_readonly("address", [](const DepositInference& d) { return d.address.str(); })
      .def_readonly("entity", &DepositInference::entity)
      .def_readonly("sweep_count", &DepositInference::sweep_count)
      .def_property_readonly("outcome", [](const DepositInference& d) {
        return d.is_inferred() ? "inferred" : "rejected";
      })
      .def_property_readonly("reason", [](const DepositInference& d) -> std::optional<std::string> {
        if (d.rejected) return std::string(to_string(*d.rejected));
        return std::nullopt;
      });

  m.def("infer_deposit_addresses",
        [](const std::vector<AccountTransfer>& transfers, const std::vector<SeedLabel>& seeds,
           std::uint64_t min_sweeps) {
          return infer_deposit_addresses(transfers, ExchangeSeedSet::from_seeds(seeds), min_sweeps);
        },
        py::arg("transfers"), py::arg("seeds"), py::arg("min_sweeps") = 1);
  m.def("build_exchange_clusters",
        [](const std::vector<DepositInference>& inferences, const std::vector<SeedLabel>& seeds,
           Partition& p) { build_exchange_clusters(inferences, ExchangeSeedSet::from_seeds(seeds), p); },
        py::arg("inferences"), py::arg("seeds"), py::arg("partition"));

  py::class_<LabeledCluster>(m, "LabeledCluster")
      .def_readonly("cluster_id", &LabeledCluster::cluster_id)
      .def_property_readonly("representative", [](const LabeledCluster& c) { return c.representative.str(); })
      .def_property_readonly("addresses", [](const LabeledCluster& c) { return names(c.members); })
      .def_property_readonly("label", [](const LabeledCluster& c) -> py::object {
        if (!c.label) return py::none();
        return py::make_tuple(c.label->name, std::string(to_string(c.label->category)));
      })
      .def_readonly("conflicts", &LabeledCluster::conflicts);

  m.def("propagate_labels", [](const std::vector<Cluster>& clusters, const std::vector<SeedLabel>& seeds) {
    return propagate_labels(clusters, seeds);
  }, py::arg("clusters"), py::arg("seeds"));
  m.def("census", [](const std::vector<LabeledCluster>& labeled, std::uint64_t top_n) {
    py::list rows;
    for (const auto& r : census(labeled, top_n)) rows.append(py::make_tuple(r.category, r.name, r.num_addresses));
    return rows;
  }, py::arg("labeled"), py::arg("top_n") = 10);
  m.def("format_census_table", [](const std::vector<LabeledCluster>& labeled, std::uint64_t top_n) {
    return format_census_table(census(labeled, top_n));
  }, py::arg("labeled"), py::arg("top_n") = 10);

  py::class_<GenConfig>(m, "GenConfig")
      .def(py::init([](py::kwargs kwargs) {
        GenConfig cfg;
        for (const auto& [k, v] : kwargs) cfg.set(py::str(k), py::str(v));
        return cfg;
      }))
      .def_readwrite("rng_seed", &GenConfig::rng_seed)
      .def_readwrite("n_entities", &GenConfig::n_entities)
      .def_readwrite("wallets_per_entity", &GenConfig::wallets_per_entity)
      .def_readwrite("n_transactions", &GenConfig::n_transactions)
      .def_readwrite("change_rate", &GenConfig::change_rate)
      .def_readwrite("adversarial_round_change_rate", &GenConfig::adversarial_round_change_rate)
      .def_readwrite("address_reuse_rate", &GenConfig::address_reuse_rate)
      .def_readwrite("decimals", &GenConfig::decimals)
      .def_readwrite("noise_wallets", &GenConfig::noise_wallets);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_property_readonly("addresses", [](const GroundTruth& t) {
        py::dict d;
        for (const auto& [a, info] : t.addresses) d[py::str(a.str())] = py::make_tuple(info.entity, info.role);
        return d;
      })
      .def_property_readonly("change_count", [](const GroundTruth& t) {
        std::size_t n = 0;
        for (const auto& tx : t.transactions) n += tx.change_address.has_value();
        return n;
      });

  m.def("generate_utxo_chain", [](const GenConfig& cfg) {
    auto chain = generate_utxo_chain(cfg);
    return py::make_tuple(std::move(chain.transactions), std::move(chain.truth));
  }, py::arg("config"));
  m.def("generate_account_chain", [](const GenConfig& cfg) {
    auto chain = generate_account_chain(cfg);
    return py::make_tuple(std::move(chain.transfers), std::move(chain.truth), std::move(chain.seeds));
  }, py::arg("config"));

  m.def("evaluate",
        [](const std::vector<Cluster>& clusters, const GroundTruth& truth,
           std::optional<std::vector<ChangeDecision>> decisions,
           std::optional<std::vector<DepositInference>> inferences) {
          return metrics_dict(evaluate(clusters, truth, decisions ? &*decisions : nullptr,
                                       inferences ? &*inferences : nullptr));
        },
        py::arg("clusters"), py::arg("truth"), py::arg("decisions") = py::none(),
        py::arg("inferences") = py::none());
}
