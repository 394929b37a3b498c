#include "addrclust/core_model.hpp"

#include <algorithm>

namespace addrclust {

namespace {

constexpr uint128 kMax128 = ~uint128{0};

}  // namespace

Address::Address(std::string value) : value_(std::move(value)) {
  if (!is_valid(value_)) {
    throw ValueError("invalid address token '" + value_ + "'");
  }
}

bool Address::is_valid(std::string_view token) noexcept {
  if (token.empty()) return false;
  return std::all_of(token.begin(), token.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    // control characters, space and DEL
    return u > 0x20 && u != 0x7f;
  });
}

uint128 pow10(unsigned exp) {
  if (exp > 38) throw ValueError("10^" + std::to_string(exp) + " exceeds 128 bits");
  uint128 r = 1;
  for (unsigned i = 0; i < exp; ++i) r *= 10;
  return r;
}

std::string to_string(uint128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

Amount parse_amount(std::string_view text, unsigned decimals) {
  if (decimals > kMaxDecimals) {
    throw ValueError("decimals " + std::to_string(decimals) + " exceeds " +
                     std::to_string(kMaxDecimals));
  }
  const auto malformed = [&] {
    return ValueError("malformed amount '" + std::string(text) + "'");
  };
  const auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  const auto all_digits = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (whole.empty() || !all_digits(whole)) throw malformed();
  if (dot != std::string_view::npos && (frac.empty() || !all_digits(frac))) throw malformed();
  if (frac.size() > decimals) {
    throw ValueError("amount '" + std::string(text) + "' has " + std::to_string(frac.size()) +
                     " fractional digits, chain allows " + std::to_string(decimals));
  }

  uint128 units = 0;
  const auto push_digit = [&](char c) {
    const auto d = static_cast<unsigned>(c - '0');
    if (units > (kMax128 - d) / 10) {
      throw ValueError("amount '" + std::string(text) + "' overflows 128 bits");
    }
    units = units * 10 + d;
  };
  for (char c : whole) push_digit(c);
  for (char c : frac) push_digit(c);
  for (std::size_t i = frac.size(); i < decimals; ++i) push_digit('0');
  return Amount{units, decimals};
}

std::string format_amount(const Amount& a) {
  std::string digits = to_string(a.base_units);
  if (a.decimals == 0) return digits;
  if (digits.size() <= a.decimals) digits.insert(0, a.decimals - digits.size() + 1, '0');
  std::string whole = digits.substr(0, digits.size() - a.decimals);
  std::string frac = digits.substr(digits.size() - a.decimals);
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  return frac.empty() ? whole : whole + "." + frac;
}

unsigned fractional_digits(const Amount& a) {
  if (a.base_units == 0) return 0;
  unsigned trailing_zeros = 0;
  uint128 v = a.base_units;
  while (trailing_zeros < a.decimals && v % 10 == 0) {
    v /= 10;
    ++trailing_zeros;
  }
  return a.decimals - trailing_zeros;
}

Amount checked_sub(const Amount& a, const Amount& b) {
  if (a.decimals != b.decimals) throw ValueError("amount decimals mismatch");
  if (b.base_units > a.base_units) {
    throw ValueError("amount underflow: " + format_amount(a) + " - " + format_amount(b));
  }
  return Amount{a.base_units - b.base_units, a.decimals};
}

Amount checked_add(const Amount& a, const Amount& b) {
  if (a.decimals != b.decimals) throw ValueError("amount decimals mismatch");
  if (a.base_units > kMax128 - b.base_units) throw ValueError("amount overflows 128 bits");
  return Amount{a.base_units + b.base_units, a.decimals};
}

std::string validate(const UtxoTransaction& tx) {
  if (tx.coinbase && !tx.inputs.empty()) return "coinbase with inputs";
  if (!tx.coinbase && tx.inputs.empty()) return "non-coinbase transaction without inputs";
  if (tx.outputs.empty()) return "transaction without outputs";
  return {};
}

}  // namespace addrclust
