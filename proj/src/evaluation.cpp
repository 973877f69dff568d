#include "topicshift/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "topicshift/strings.hpp"
#include "topicshift/text.hpp"

namespace topicshift {

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string display_name(std::string_view method) {
  if (method == "textual") return "Textual similarity";
  if (method == "hits") return "HITS";
  if (method == "reply_pagerank") return "Reply PageRank";
  if (method == "co_hits") return "Co-HITS";
  if (method == "bi_pagerank_hits") return "Bi-PageRank-HITS";
  return std::string(method);
}

std::string group_title(std::string_view group) {
  return group == kGroupIntroducing ? "Entity-based content introducing" : "No content introducing";
}

void require_known_group(std::string_view group) {
  const auto& groups = all_groups();
  if (std::find(groups.begin(), groups.end(), group) == groups.end()) {
    throw InvalidInput("unknown evaluation group '" + std::string(group) + "'");
  }
}

void require_known_method(std::string_view method) {
  const auto& methods = all_methods();
  if (std::find(methods.begin(), methods.end(), method) == methods.end()) {
    throw InvalidInput("unknown ranking method '" + std::string(method) + "'");
  }
}

}  // namespace

std::vector<LabeledInstance> load_fixtures(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open fixture file", path.string());
  std::vector<LabeledInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      LabeledInstance inst;
      inst.id = rec.value("id", "instance-" + std::to_string(line_no));
      inst.group = rec.at("group").get<std::string>();
      require_known_group(inst.group);
      inst.context = rec.at("context").get<std::vector<std::string>>();
      for (const auto& c : rec.at("candidates")) {
        LabeledCandidate cand{c.at("text").get<std::string>(), c.at("label").get<int>()};
        if (cand.label != 0 && cand.label != 1) throw InvalidInput("labels must be 0 or 1");
        inst.candidates.push_back(std::move(cand));
      }
      if (rec.contains("entities")) inst.entities = rec["entities"].get<std::vector<std::string>>();
      if (inst.context.empty()) throw InvalidInput("instance has no context utterances");
      if (inst.candidates.empty()) throw InvalidInput("instance has no candidates");
      out.push_back(std::move(inst));
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(e.what(), path.string(), line_no);
    } catch (const InvalidInput& e) {
      throw LoadError(e.what(), path.string(), line_no);
    }
  }
  if (out.empty()) throw LoadError("no fixtures", path.string());
  return out;
}

Metrics compute_metrics(std::span<const std::size_t> ranking,
                        const std::map<std::size_t, int>& labels) {
  if (ranking.empty()) throw InvalidInput("compute_metrics: empty ranking");
  std::vector<int> gains;
  gains.reserve(ranking.size());
  for (std::size_t id : ranking) {
    const auto it = labels.find(id);
    if (it == labels.end()) throw InvalidInput("compute_metrics: no label for id " + std::to_string(id));
    gains.push_back(it->second);
  }

  Metrics m;
  m.p1 = gains.front() > 0 ? 1.0 : 0.0;

  std::size_t relevant = 0;
  double precision_sum = 0.0;
  double dcg = 0.0;
  for (std::size_t k = 0; k < gains.size(); ++k) {
    if (gains[k] > 0) {
      ++relevant;
      precision_sum += static_cast<double>(relevant) / static_cast<double>(k + 1);
    }
    dcg += gains[k] / std::log2(static_cast<double>(k + 2));
  }
  if (relevant == 0) return m;
  m.ap = precision_sum / static_cast<double>(relevant);

  std::vector<int> ideal = gains;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t k = 0; k < ideal.size(); ++k) idcg += ideal[k] / std::log2(static_cast<double>(k + 2));
  m.ndcg = dcg / idcg;
  return m;
}

const std::vector<std::string>& all_methods() {
  static const std::vector<std::string> methods = {"textual", "hits", "reply_pagerank", "co_hits",
                                                   "bi_pagerank_hits"};
  return methods;
}

const std::vector<std::string>& all_groups() {
  static const std::vector<std::string> groups = {std::string(kGroupNonIntroducing),
                                                  std::string(kGroupIntroducing)};
  return groups;
}

RankedList rank_with(std::string_view method, const RerankState& state, const RankParams& params) {
  if (method == "bi_pagerank_hits") return bi_pagerank_hits(state, params);
  return rank_baseline(parse_baseline(method), state, params);
}

std::string MetricReport::to_table() const {
  constexpr std::size_t kMethodWidth = 20;
  std::string out;
  std::string current;
  for (const auto& cell : cells) {
    if (cell.group != current) {
      current = cell.group;
      if (!out.empty()) out += '\n';
      out += "Group: " + group_title(cell.group) + " (" + cell.group + ", n=" +
             std::to_string(cell.instances) + ")\n";
      out += pad("Reranking method", kMethodWidth) + "  p@1     MAP     nDCG\n";
    }
    out += pad(display_name(cell.method), kMethodWidth) + "  " + fixed(cell.mean.p1) + "  " +
           fixed(cell.mean.ap) + "  " + fixed(cell.mean.ndcg) + "\n";
  }
  return out;
}

nlohmann::ordered_json MetricReport::to_json() const {
  nlohmann::ordered_json doc;
  auto& rows = doc["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : cells) {
    rows.push_back({{"group", c.group},
                    {"method", c.method},
                    {"instances", c.instances},
                    {"p1", c.mean.p1},
                    {"map", c.mean.ap},
                    {"ndcg", c.mean.ndcg}});
  }
  return doc;
}

MetricReport run_eval(std::span<const LabeledInstance> fixtures,
                      std::span<const std::string> methods, std::span<const std::string> groups,
                      const RankParams& params) {
  if (fixtures.empty()) throw InvalidInput("run_eval: no fixtures");
  for (const auto& m : methods) require_known_method(m);
  for (const auto& g : groups) require_known_group(g);

  auto stats = std::make_shared<CorpusStats>();
  for (const auto& inst : fixtures) {
    for (const auto& c : inst.context) stats->add_document(c);
    for (const auto& c : inst.candidates) stats->add_document(c.text);
  }
  const TfIdfScorer scorer(stats);

  MetricReport report;
  for (const auto& group : groups) {
    std::vector<const LabeledInstance*> members;
    for (const auto& inst : fixtures) {
      if (inst.group == group) members.push_back(&inst);
    }
    std::vector<RerankState> states;
    for (const auto* inst : members) {
      std::vector<std::string> texts;
      for (const auto& c : inst->candidates) texts.push_back(c.text);
      states.push_back(build_rerank_state(inst->context, std::move(texts), scorer));
    }

    for (const auto& method : methods) {
      ReportCell cell{group, method, {}, members.size()};
      for (std::size_t i = 0; i < members.size(); ++i) {
        std::map<std::size_t, int> labels;
        for (std::size_t j = 0; j < members[i]->candidates.size(); ++j) {
          labels[j] = members[i]->candidates[j].label;
        }
        const auto order = rank_with(method, states[i], params).order();
        const Metrics m = compute_metrics(order, labels);
        cell.mean.p1 += m.p1;
        cell.mean.ap += m.ap;
        cell.mean.ndcg += m.ndcg;
      }
      if (!members.empty()) {
        const double n = static_cast<double>(members.size());
        cell.mean.p1 /= n;
        cell.mean.ap /= n;
        cell.mean.ndcg /= n;
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

}  // namespace topicshift
