#include "addrclust/labeling.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace addrclust {

LabeledCluster unlabeled(const Cluster& cluster) {
  return LabeledCluster{cluster.cluster_id, cluster.representative, cluster.members,
                        cluster.heuristics, std::nullopt, {}};
}

std::vector<LabeledCluster> propagate_labels(std::span<const Cluster> clusters,
                                             std::span<const SeedLabel> seeds) {
  std::unordered_map<std::string, std::vector<const SeedLabel*>> by_address;
  for (const auto& s : seeds) by_address[s.address.str()].push_back(&s);

  std::vector<LabeledCluster> out;
  out.reserve(clusters.size());
  for (const auto& cluster : clusters) {
    auto lc = unlabeled(cluster);
    // name -> category of the seed on the bytewise-smallest member carrying it
    std::map<std::string, Category> names;
    for (const auto& member : cluster.members) {
      auto it = by_address.find(member.str());
      if (it == by_address.end()) continue;
      std::map<std::string, Category> here;
      for (const auto* s : it->second) {
        auto [slot, inserted] = here.try_emplace(s->name, s->category);
        if (!inserted) slot->second = std::min(slot->second, s->category);
      }
      for (const auto& [name, cat] : here) names.try_emplace(name, cat);
    }
    if (names.size() == 1) {
      lc.label = EntityLabel{names.begin()->first, names.begin()->second};
    } else if (names.size() > 1) {
      for (const auto& [name, cat] : names) lc.conflicts.push_back(name);
    }
    out.push_back(std::move(lc));
  }
  return out;
}

std::vector<CensusRow> census(std::span<const LabeledCluster> labeled, std::uint64_t top_n) {
  if (top_n < 1) throw ValueError("census top_n must be at least 1");
  std::vector<CensusRow> rows;
  std::uint64_t unlabeled_total = 0;
  for (const auto& c : labeled) {
    if (c.label) {
      rows.push_back({std::string(to_string(c.label->category)), c.label->name, c.members.size()});
    } else {
      unlabeled_total += c.members.size();
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const CensusRow& a, const CensusRow& b) {
    if (a.num_addresses != b.num_addresses) return a.num_addresses > b.num_addresses;
    return a.name < b.name;
  });
  if (rows.size() > top_n) rows.resize(top_n);
  rows.push_back({"-", std::string(kUnlabeledName), unlabeled_total});
  return rows;
}

std::string group_thousands(std::uint64_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

std::string format_census_table(std::span<const CensusRow> rows) {
  const std::string h_cat = "category", h_name = "name", h_num = "number of addresses";
  std::size_t w_cat = h_cat.size(), w_name = h_name.size(), w_num = h_num.size();
  std::vector<std::string> counts;
  for (const auto& r : rows) {
    counts.push_back(group_thousands(r.num_addresses));
    w_cat = std::max(w_cat, r.category.size());
    w_name = std::max(w_name, r.name.size());
    w_num = std::max(w_num, counts.back().size());
  }
  const auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
  const auto lpad = [](const std::string& s, std::size_t w) { return std::string(w - s.size(), ' ') + s; };

  std::string out = pad(h_cat, w_cat) + "  " + pad(h_name, w_name) + "  " + h_num + "\n";
  out += std::string(w_cat, '-') + "  " + std::string(w_name, '-') + "  " + std::string(w_num, '-') + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += pad(rows[i].category, w_cat) + "  " + pad(rows[i].name, w_name) + "  " +
           lpad(counts[i], w_num) + "\n";
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  return q + "\"";
}

}  // namespace

std::string format_census_csv(std::span<const CensusRow> rows) {
  std::string out = "category,name,num_addresses\n";
  for (const auto& r : rows) {
    out += csv_field(r.category) + "," + csv_field(r.name) + "," + std::to_string(r.num_addresses) + "\n";
  }
  return out;
}

}  // namespace addrclust
