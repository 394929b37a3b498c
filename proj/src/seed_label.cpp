#include "addrclust/seed_label.hpp"

namespace addrclust {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kExchange: return "exchange";
    case Category::kMerchantService: return "merchant service";
    case Category::kP2pExchange: return "p2p exchange";
    case Category::kHostedWallet: return "hosted wallet";
    case Category::kOther: return "other";
  }
  return "other";
}

Category category_from_string(std::string_view name, bool* recognized) {
  for (auto c : {Category::kExchange, Category::kMerchantService, Category::kP2pExchange,
                 Category::kHostedWallet, Category::kOther}) {
    if (to_string(c) == name) {
      if (recognized) *recognized = true;
      return c;
    }
  }
  if (recognized) *recognized = false;
  return Category::kOther;
}

}  // namespace addrclust
