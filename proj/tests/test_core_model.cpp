#include <random>

#include "addrclust/core_model.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace addrclust;

namespace {

std::string random_decimal_text(std::mt19937_64& rng, unsigned decimals) {
  std::uniform_int_distribution<int> digit(0, 9);
  std::uniform_int_distribution<int> whole_len(1, 8);
  std::uniform_int_distribution<unsigned> frac_len(0, decimals);
  std::string s;
  const int w = whole_len(rng);
  for (int i = 0; i < w; ++i) s.push_back(static_cast<char>('0' + digit(rng)));
  const unsigned f = frac_len(rng);
  if (f > 0) {
    s.push_back('.');
    for (unsigned i = 0; i < f; ++i) s.push_back(static_cast<char>('0' + digit(rng)));
  }
  return s;
}

}  // namespace

TEST_CASE("parse_amount scales decimal text exactly") {
  CHECK(to_string(parse_amount("174.65893626", 18).base_units) == "174658936260000000000");
  CHECK(parse_amount("0", 8).base_units == 0);
  CHECK(parse_amount("5.0", 8).base_units == 500000000);
  CHECK(parse_amount("1", 0).base_units == 1);

  const auto fee = checked_sub(parse_amount("137.8303045", 18), parse_amount("137.8298845", 18));
  CHECK(fee == parse_amount("0.00042", 18));
  CHECK(to_string(fee.base_units) == "420000000000000");
}

TEST_CASE("parse_amount rejects malformed text, excess precision and overflow") {
  for (const char* bad : {"", ".", "1.", ".5", "1.2.3", "-1", "+1", "1e5", " 1", "1 ", "0x10", "1,5"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_amount(bad, 8), ValueError);
  }
  CHECK_THROWS_AS(parse_amount("0.123456789", 8), ValueError);
  CHECK_NOTHROW(parse_amount("340282366920938463463374607431768211455", 0));
  CHECK_THROWS_AS(parse_amount("340282366920938463463374607431768211456", 0), ValueError);
  CHECK_NOTHROW(parse_amount("340282366920938463463.374607431768211455", 18));
  CHECK_THROWS_AS(parse_amount("340282366920938463464", 18), ValueError);
  CHECK_THROWS_AS(parse_amount("1", 31), ValueError);
}

TEST_CASE("fractional_digits counts significant fractional digits") {
  CHECK(fractional_digits(parse_amount("174.65893626", 18)) == 8);
  CHECK(fractional_digits(parse_amount("5.0", 8)) == 0);
  CHECK(fractional_digits(parse_amount("0.00042", 18)) == 5);
  CHECK(fractional_digits(parse_amount("0.12340", 8)) == 4);
  CHECK(fractional_digits(parse_amount("0", 8)) == 0);
  CHECK(fractional_digits(parse_amount("0.2999", 8)) == 4);
  CHECK(fractional_digits(parse_amount("0.29991234", 8)) == 8);
}

TEST_CASE("format_amount is canonical") {
  CHECK(format_amount(parse_amount("5.0", 8)) == "5");
  CHECK(format_amount(parse_amount("0.00042", 18)) == "0.00042");
  CHECK(format_amount(parse_amount("007.10", 8)) == "7.1");
  CHECK(format_amount(Amount{0, 8}) == "0");
  CHECK(format_amount(Amount{1, 8}) == "0.00000001");
}

TEST_CASE("property: format/parse round trip and the >4 digit rule agree with a text oracle") {
  std::mt19937_64 rng(20191015);
  for (int i = 0; i < 5000; ++i) {
    const unsigned decimals = static_cast<unsigned>(rng() % (kMaxDecimals + 1));
    const auto text = random_decimal_text(rng, decimals);
    CAPTURE(text);
    CAPTURE(decimals);
    const Amount a = parse_amount(text, decimals);
    const Amount back = parse_amount(format_amount(a), decimals);
    REQUIRE(back == a);
    REQUIRE(fractional_digits(a) == oracle::fractional_digits_of_text(text));
    if (decimals >= 4) {
      const bool mod_rule = a.base_units % pow10(decimals - 4) != 0;
      REQUIRE((fractional_digits(a) > 4) == mod_rule);
    }
  }
}

TEST_CASE("checked arithmetic") {
  CHECK_THROWS_AS(checked_sub(Amount{1, 8}, Amount{2, 8}), ValueError);
  CHECK_THROWS_AS(checked_sub(Amount{1, 8}, Amount{1, 18}), ValueError);
  CHECK_THROWS_AS(checked_add(Amount{~uint128{0}, 0}, Amount{1, 0}), ValueError);
  CHECK(checked_add(Amount{2, 8}, Amount{3, 8}) == Amount{5, 8});
}

TEST_CASE("Address tokens") {
  CHECK(Address::is_valid("1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa"));
  CHECK(Address::is_valid("0xAbC"));
  CHECK_FALSE(Address::is_valid(""));
  CHECK_FALSE(Address::is_valid("a b"));
  CHECK_FALSE(Address::is_valid("a\tb"));
  CHECK_FALSE(Address::is_valid("a\nb"));
  CHECK_THROWS_AS(Address(""), ValueError);
  CHECK(Address("abc") != Address("ABC"));
  CHECK(Address("B") < Address("a"));
}

TEST_CASE("property: ChainPosition is a strict total order") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const ChainPosition a{rng() % 4, rng() % 4};
    const ChainPosition b{rng() % 4, rng() % 4};
    const int relations = (a < b) + (b < a) + (a == b);
    REQUIRE(relations == 1);
    if (a < b) {
      REQUIRE((a.block_height < b.block_height ||
               (a.block_height == b.block_height && a.tx_index < b.tx_index)));
    }
  }
}

TEST_CASE("validate flags coinbase and output invariants") {
  UtxoTransaction tx{"t", {}, true, {{Address("A"), Amount{1, 8}}}, {{Address("B"), Amount{1, 8}}}};
  CHECK(validate(tx) == "coinbase with inputs");
  tx.coinbase = false;
  CHECK(validate(tx).empty());
  tx.outputs.clear();
  CHECK_FALSE(validate(tx).empty());
  tx.inputs.clear();
  tx.outputs = {{Address("B"), Amount{1, 8}}};
  CHECK_FALSE(validate(tx).empty());
}
