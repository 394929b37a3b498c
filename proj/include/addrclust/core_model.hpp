#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace addrclust {

/// Thrown when a caller breaks an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using uint128 = unsigned __int128;

/// Raised on any violation of a value-type invariant (bad address token,
/// malformed amount text, amount overflow).
class ValueError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Opaque, case-sensitive address token. No checksum or encoding validation
/// is done; the only requirement is a non-empty run of printable,
/// non-whitespace bytes.
class Address {
 public:
  Address() = default;
  explicit Address(std::string value);

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend bool operator==(const Address&, const Address&) = default;
  friend std::strong_ordering operator<=>(const Address& a, const Address& b) {
    return a.value_.compare(b.value_) <=> 0;
  }

  static bool is_valid(std::string_view token) noexcept;

 private:
  std::string value_;
};

/// Maximum number of decimals a chain may declare.
inline constexpr unsigned kMaxDecimals = 30;

/// Exact fixed-point amount: `base_units / 10^decimals` coin units.
struct Amount {
  uint128 base_units = 0;
  unsigned decimals = 0;

  friend bool operator==(const Amount&, const Amount&) = default;
};

/// 10^exp as a 128-bit integer. exp must be <= 38.
uint128 pow10(unsigned exp);

/// Parses `[0-9]+(\.[0-9]+)?` into base units scaled by 10^decimals.
/// Throws ValueError on malformed text, excess precision or overflow.
Amount parse_amount(std::string_view text, unsigned decimals);

/// Canonical decimal text: no trailing fractional zeros, no dangling point.
std::string format_amount(const Amount& a);

/// Smallest k such that base_units is divisible by 10^(decimals - k).
unsigned fractional_digits(const Amount& a);

/// Exact a - b; throws ValueError on mismatched decimals or underflow.
Amount checked_sub(const Amount& a, const Amount& b);
Amount checked_add(const Amount& a, const Amount& b);

std::string to_string(uint128 v);

struct ChainPosition {
  std::uint64_t block_height = 0;
  std::uint64_t tx_index = 0;

  friend auto operator<=>(const ChainPosition&, const ChainPosition&) = default;
};

struct TxOutput {
  Address address;
  Amount value;

  friend bool operator==(const TxOutput&, const TxOutput&) = default;
};

struct UtxoTransaction {
  std::string txid;
  ChainPosition position;
  bool coinbase = false;
  std::vector<TxOutput> inputs;
  std::vector<TxOutput> outputs;

  friend bool operator==(const UtxoTransaction&, const UtxoTransaction&) = default;
};

/// Checks the per-record invariants (coinbase iff no inputs, outputs
/// non-empty). Returns an empty string if valid, otherwise a reason.
std::string validate(const UtxoTransaction& tx);

struct AccountTransfer {
  std::string hash;
  ChainPosition position;
  Address from;
  Address to;
  Amount amount;
  std::string asset;

  friend bool operator==(const AccountTransfer&, const AccountTransfer&) = default;
};

}  // namespace addrclust

template <>
struct std::hash<addrclust::Address> {
  std::size_t operator()(const addrclust::Address& a) const noexcept {
    return std::hash<std::string>{}(a.str());
  }
};
