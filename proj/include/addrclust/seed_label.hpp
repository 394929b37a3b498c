#pragma once

#include <string>
#include <string_view>

#include "addrclust/core_model.hpp"

namespace addrclust {

enum class Category {
  kExchange,
  kMerchantService,
  kP2pExchange,
  kHostedWallet,
  kOther,
};

std::string_view to_string(Category c);

/// Maps a category name onto the closed set. Unknown names yield kOther and
/// set `*recognized` to false when provided.
Category category_from_string(std::string_view name, bool* recognized = nullptr);

/// An externally sourced attribution of one address to a named entity.
struct SeedLabel {
  Address address;
  std::string name;
  Category category = Category::kOther;
  std::string source;

  friend bool operator==(const SeedLabel&, const SeedLabel&) = default;
};

}  // namespace addrclust
