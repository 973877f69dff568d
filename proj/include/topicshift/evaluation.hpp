#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "topicshift/ranking.hpp"

namespace topicshift {

struct LabeledCandidate {
  std::string text;
  int label = 0;  // 1 appropriate, 0 inappropriate
};

struct LabeledInstance {
  std::string id;
  std::string group;  // "introducing" or "non_introducing"
  std::vector<std::string> context;
  std::vector<LabeledCandidate> candidates;
  std::vector<std::string> entities;  // optional annotation
};

/// JSON Lines, one instance per line:
///   {"id": "...", "group": "introducing", "context": ["..."],
///    "candidates": [{"text": "...", "label": 1}], "entities": ["..."]}
/// Throws LoadError naming the line on schema violations.
std::vector<LabeledInstance> load_fixtures(const std::filesystem::path& path);

struct Metrics {
  double p1 = 0.0;
  double ap = 0.0;
  double ndcg = 0.0;
};

/// p@1, average precision and nDCG (gain = label, discount 1/log2(rank+1))
/// over the full ranking. Instances without a relevant item score 0.
/// Throws InvalidInput on an empty ranking or an unlabeled id.
Metrics compute_metrics(std::span<const std::size_t> ranking,
                        const std::map<std::size_t, int>& labels);

inline constexpr std::string_view kGroupIntroducing = "introducing";
inline constexpr std::string_view kGroupNonIntroducing = "non_introducing";

/// Methods in report order.
const std::vector<std::string>& all_methods();
/// Groups in report order.
const std::vector<std::string>& all_groups();

/// Ranks one instance's candidates by method label (any baseline label or
/// "bi_pagerank_hits").
RankedList rank_with(std::string_view method, const RerankState& state, const RankParams& params);

struct ReportCell {
  std::string group;
  std::string method;
  Metrics mean;
  std::size_t instances = 0;
};

struct MetricReport {
  std::vector<ReportCell> cells;  // grouped by group, methods in request order

  /// Aligned table, one block per group. Groups are never pooled.
  std::string to_table() const;
  nlohmann::ordered_json to_json() const;
};

/// Reranks every instance of each requested group with each requested method
/// and averages the metrics per (group, method). Text statistics come from
/// all context and candidate texts in `fixtures`.
MetricReport run_eval(std::span<const LabeledInstance> fixtures,
                      std::span<const std::string> methods, std::span<const std::string> groups,
                      const RankParams& params = {});

}  // namespace topicshift
