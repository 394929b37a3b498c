#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "addrclust/disjoint_set.hpp"
#include "addrclust/seed_label.hpp"

namespace addrclust {

struct EntityLabel {
  std::string name;
  Category category = Category::kOther;

  friend bool operator==(const EntityLabel&, const EntityLabel&) = default;
};

/// A finalized cluster with its propagated label. `label` is set iff exactly
/// one distinct seed name occurs among the members; with two or more,
/// `conflicts` lists them bytewise-sorted and the label stays empty.
struct LabeledCluster {
  std::uint64_t cluster_id = 0;
  Address representative;
  std::vector<Address> members;
  std::vector<HeuristicTag> heuristics;
  std::optional<EntityLabel> label;
  std::vector<std::string> conflicts;

  friend bool operator==(const LabeledCluster&, const LabeledCluster&) = default;
};

LabeledCluster unlabeled(const Cluster& cluster);

std::vector<LabeledCluster> propagate_labels(std::span<const Cluster> clusters,
                                             std::span<const SeedLabel> seeds);

struct CensusRow {
  std::string category;
  std::string name;
  std::uint64_t num_addresses = 0;

  friend bool operator==(const CensusRow&, const CensusRow&) = default;
};

inline constexpr std::string_view kUnlabeledName = "(unlabeled)";

/// Rows for the `top_n` largest labeled clusters (ties by name), followed by
/// one "(unlabeled)" row totalling every cluster without a label.
std::vector<CensusRow> census(std::span<const LabeledCluster> labeled, std::uint64_t top_n = 10);

/// 23189630 -> "23,189,630".
std::string group_thousands(std::uint64_t n);

/// Space-aligned table with header `category  name  number of addresses`.
std::string format_census_table(std::span<const CensusRow> rows);

/// `category,name,num_addresses` CSV with plain integer counts.
std::string format_census_csv(std::span<const CensusRow> rows);

}  // namespace addrclust
