#include <algorithm>
#include <random>

#include "addrclust/account_clustering.hpp"
#include "addrclust/synth.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace addrclust;

namespace {

AccountTransfer xfer(std::string hash, std::uint64_t block, const char* from, const char* to,
                     const char* value, std::string asset = "ETH") {
  return {std::move(hash), {block, 0}, Address(from), Address(to), parse_amount(value, 18),
          std::move(asset)};
}

ExchangeSeedSet binance_and_kraken() {
  ExchangeSeedSet s;
  s.add("binance.com", Address("H"));
  s.add("kraken.com", Address("K"));
  return s;
}

const DepositInference* find(const std::vector<DepositInference>& v, const char* addr) {
  for (const auto& d : v) {
    if (d.address.str() == addr) return &d;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("a swept deposit address is inferred") {
  ExchangeSeedSet seeds;
  seeds.add("binance.com", Address("H"));
  const std::vector<AccountTransfer> transfers{xfer("t1", 1, "X", "D", "137.8303045"),
                                               xfer("t2", 2, "D", "H", "137.8298845")};
  const auto out = infer_deposit_addresses(transfers, seeds);
  const auto* x = find(out, "X");
  const auto* d = find(out, "D");
  REQUIRE(d);
  CHECK(d->is_inferred());
  CHECK(d->entity == "binance.com");
  CHECK(d->sweep_count == 1);
  REQUIRE(x);
  CHECK(x->rejected == DepositRejectReason::kSendsElsewhere);
  CHECK_FALSE(find(out, "H"));
}

TEST_CASE("deposit rejection reasons") {
  const auto seeds = binance_and_kraken();
  SUBCASE("sends elsewhere") {
    const auto out = infer_deposit_addresses(
        std::vector{xfer("a", 1, "D", "H", "1"), xfer("b", 2, "D", "U", "1")}, seeds);
    CHECK(find(out, "D")->rejected == DepositRejectReason::kSendsElsewhere);
  }
  SUBCASE("multi exchange") {
    const auto out = infer_deposit_addresses(
        std::vector{xfer("a", 1, "D", "H", "1"), xfer("b", 2, "D", "K", "1")}, seeds);
    CHECK(find(out, "D")->rejected == DepositRejectReason::kMultiExchange);
  }
  SUBCASE("multi exchange wins over sends elsewhere") {
    const auto out = infer_deposit_addresses(
        std::vector{xfer("a", 1, "D", "H", "1"), xfer("b", 2, "D", "K", "1"),
                    xfer("c", 3, "D", "U", "1")},
        seeds);
    CHECK(find(out, "D")->rejected == DepositRejectReason::kMultiExchange);
  }
  SUBCASE("seed wallet") {
    const auto out = infer_deposit_addresses(std::vector{xfer("a", 1, "H", "K", "1")}, seeds);
    CHECK(find(out, "H")->rejected == DepositRejectReason::kIsSeed);
  }
  SUBCASE("only self transfers") {
    const auto out = infer_deposit_addresses(std::vector{xfer("a", 1, "D", "D", "1")}, seeds);
    CHECK(find(out, "D")->rejected == DepositRejectReason::kNoOutgoing);
  }
  SUBCASE("self transfers are ignored otherwise") {
    const auto out = infer_deposit_addresses(
        std::vector{xfer("a", 1, "D", "D", "1"), xfer("b", 2, "D", "H", "1")}, seeds);
    CHECK(find(out, "D")->is_inferred());
  }
  SUBCASE("assets are pooled") {
    const auto out = infer_deposit_addresses(
        std::vector{xfer("a", 1, "D", "H", "1"), xfer("b", 2, "D", "U", "5", "ERC20:USDT")}, seeds);
    CHECK(find(out, "D")->rejected == DepositRejectReason::kSendsElsewhere);
  }
  SUBCASE("too few sweeps") {
    const auto out = infer_deposit_addresses(std::vector{xfer("a", 1, "D", "H", "1")}, seeds, 2);
    CHECK(find(out, "D")->rejected == DepositRejectReason::kInsufficientSweeps);
    CHECK(find(out, "D")->sweep_count == 1);
  }
  SUBCASE("min_sweeps must be positive") {
    CHECK_THROWS(infer_deposit_addresses(std::vector{xfer("a", 1, "D", "H", "1")}, seeds, 0));
  }
}

TEST_CASE("seed sets keep exchanges only and reject conflicting owners") {
  const std::vector<SeedLabel> labels{{Address("H"), "binance.com", Category::kExchange, "x"},
                                      {Address("M"), "shop", Category::kMerchantService, "x"}};
  const auto s = ExchangeSeedSet::from_seeds(labels);
  CHECK(s.entities().size() == 1);
  CHECK(*s.entity_of("H") == "binance.com");
  CHECK_FALSE(s.entity_of("M"));
  ExchangeSeedSet c;
  c.add("a", Address("H"));
  CHECK_NOTHROW(c.add("a", Address("H")));
  CHECK_THROWS_AS(c.add("b", Address("H")), ValueError);
}

TEST_CASE("reject reasons round-trip through their names") {
  for (int r = 0; r <= static_cast<int>(DepositRejectReason::kInsufficientSweeps); ++r) {
    const auto reason = static_cast<DepositRejectReason>(r);
    CHECK(deposit_reject_reason_from_string(to_string(reason)) == reason);
  }
}

namespace {

std::vector<AccountTransfer> random_transfers(std::mt19937_64& rng, std::size_t n) {
  const char* pool[] = {"H", "K", "D1", "D2", "D3", "D4", "U1", "U2"};
  std::vector<AccountTransfer> v;
  for (std::size_t i = 0; i < n; ++i) {
    v.push_back(xfer("h" + std::to_string(i), i, pool[rng() % 8], pool[rng() % 8], "1"));
  }
  return v;
}

}  // namespace

TEST_CASE("property: deposit inference invariants on random transfers") {
  std::mt19937_64 rng(2024);
  const auto seeds = binance_and_kraken();
  for (int round = 0; round < 200; ++round) {
    auto transfers = random_transfers(rng, 1 + rng() % 12);
    const auto base = infer_deposit_addresses(transfers, seeds, 1);
    for (const auto& d : base) {
      REQUIRE_FALSE((d.is_inferred() && seeds.entity_of(d.address.str())));
      REQUIRE((d.is_inferred() == d.entity.has_value() || !d.is_inferred()));
      if (d.is_inferred()) REQUIRE(d.sweep_count >= 1);
    }
    REQUIRE(std::is_sorted(base.begin(), base.end(),
                           [](const auto& a, const auto& b) { return a.address < b.address; }));

    // Raising min_sweeps can only remove inferences.
    const auto stricter = infer_deposit_addresses(transfers, seeds, 2);
    REQUIRE(stricter.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (stricter[i].is_inferred()) REQUIRE(base[i].is_inferred());
    }

    // Aggregation ignores transfer order.
    std::shuffle(transfers.begin(), transfers.end(), rng);
    REQUIRE(infer_deposit_addresses(transfers, seeds, 1) == base);
  }
}

TEST_CASE("build_exchange_clusters joins seeds and deposits per entity") {
  ExchangeSeedSet seeds;
  seeds.add("binance.com", Address("H1"));
  seeds.add("binance.com", Address("H2"));
  seeds.add("kraken.com", Address("K1"));
  const std::vector<DepositInference> inferences{
      {Address("D1"), "binance.com", 1, std::nullopt},
      {Address("D2"), "binance.com", 3, std::nullopt},
      {Address("D3"), "kraken.com", 1, std::nullopt},
      {Address("R"), std::nullopt, 0, DepositRejectReason::kSendsElsewhere}};
  Partition p;
  build_exchange_clusters(inferences, seeds, p);
  const auto clusters = p.finalize();
  CHECK(oracle::groups_of(clusters) ==
        oracle::Groups{{"D1", "D2", "H1", "H2"}, {"D3", "K1"}});
  CHECK(clusters[0].heuristics ==
        std::vector<HeuristicTag>{HeuristicTag::kExchangeSeed, HeuristicTag::kGathering});

  const std::vector<DepositInference> orphan{{Address("D9"), "nowhere", 1, std::nullopt}};
  Partition q;
  CHECK_THROWS_AS(build_exchange_clusters(orphan, seeds, q), ContractError);
}

TEST_CASE("synthetic exchanges cluster exactly as generated") {
  GenConfig cfg;
  cfg.rng_seed = 17;
  cfg.n_entities = 3;
  cfg.wallets_per_entity = 100;
  cfg.n_transactions = 500;
  cfg.decimals = 18;
  const auto chain = generate_account_chain(cfg);
  const auto seeds = ExchangeSeedSet::from_seeds(chain.seeds);
  const auto inferences = infer_deposit_addresses(chain.transfers, seeds);
  std::size_t inferred = 0;
  for (const auto& d : inferences) {
    if (!d.is_inferred()) continue;
    ++inferred;
    const auto& truth = chain.truth.addresses.at(d.address);
    REQUIRE(truth.role == "deposit_address");
    REQUIRE(truth.entity == *d.entity);
  }
  CHECK(inferred == 300);

  Partition p;
  build_exchange_clusters(inferences, seeds, p);
  for (const auto& c : p.finalize()) {
    const auto& entity = chain.truth.addresses.at(c.representative).entity;
    for (const auto& m : c.members) REQUIRE(chain.truth.addresses.at(m).entity == entity);
    CHECK(c.members.size() == 101);
  }
  CHECK(p.cluster_count() == 3);
}
