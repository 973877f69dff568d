#include "topicshift/dialogue.hpp"

#include <fstream>
#include <map>

#include "topicshift/strings.hpp"

namespace topicshift {

std::string_view to_string(Speaker s) { return s == Speaker::Human ? "human" : "computer"; }

void ConversationSession::add(Speaker speaker, std::string text) {
  utterances_.push_back({speaker, std::move(text), next_turn_++});
}

void ConversationSession::pop_back() {
  if (!utterances_.empty()) utterances_.pop_back();
}

std::vector<std::string> ConversationSession::context_window(std::size_t n) const {
  const std::size_t start = utterances_.size() > n ? utterances_.size() - n : 0;
  std::vector<std::string> out;
  for (std::size_t i = start; i < utterances_.size(); ++i) out.push_back(utterances_[i].text);
  return out;
}

PatternSet PatternSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pattern file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return from_lines(lines, path.string());
}

PatternSet PatternSet::from_lines(const std::vector<std::string>& lines, std::string_view origin) {
  PatternSet set;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view entry = trim(lines[i]);
    if (entry.empty() || entry.front() == '#') continue;
    if (entry.starts_with("re:")) {
      const std::string expr(trim(entry.substr(3)));
      try {
        set.regexes_.emplace_back(expr, std::regex::ECMAScript | std::regex::icase);
      } catch (const std::regex_error& e) {
        throw ConfigError(std::string(origin) + ":" + std::to_string(i + 1) + ": invalid regex '" +
                          expr + "': " + e.what());
      }
    } else {
      set.literals_.push_back(ascii_lower(entry));
    }
  }
  if (set.size() == 0) throw ConfigError(std::string(origin) + ": no stalemate patterns");
  return set;
}

bool PatternSet::matches(std::string_view utterance) const {
  const std::string text(trim(utterance));
  const std::string lowered = ascii_lower(text);
  for (const auto& lit : literals_) {
    if (lit == lowered) return true;
  }
  for (const auto& re : regexes_) {
    if (std::regex_match(text, re)) return true;
  }
  return false;
}

bool detect_stalemate(const PatternSet& patterns, std::string_view utterance) {
  return patterns.matches(utterance);
}

Resources Resources::assemble(std::shared_ptr<const CorpusIndex> index,
                              std::shared_ptr<const EntityGraph> graph,
                              std::shared_ptr<const PatternSet> patterns, RankParams params,
                              RetrievalCaps caps) {
  if (!index || !graph || !patterns) throw ConfigError("dialogue resources are incomplete");
  params.validate();
  Resources r;
  r.recognizer = std::make_shared<DictionaryRecognizer>(*graph);
  r.scorer = std::make_shared<TfIdfScorer>(index->shared_stats());
  r.index = std::move(index);
  r.graph = std::move(graph);
  r.patterns = std::move(patterns);
  r.params = params;
  r.caps = caps;
  return r;
}

namespace {

// Context entities seed retrieval alongside their expansions.
constexpr double kContextEntityWeight = 1.0;

std::vector<WeightedEntity> expand(const EntityGraph& graph, const std::vector<std::string>& seeds,
                                   std::size_t k) {
  std::vector<WeightedEntity> out;
  std::map<std::string, std::size_t> position;
  for (const auto& seed : seeds) {
    for (auto& neighbor : graph.related(seed, k)) {
      const auto it = position.find(neighbor.name);
      if (it == position.end()) {
        position.emplace(neighbor.name, out.size());
        out.push_back(std::move(neighbor));
      } else if (neighbor.weight > out[it->second].weight) {
        out[it->second].weight = neighbor.weight;
      }
    }
  }
  return out;
}

void record_ranking(ResponseTrace& trace, const CorpusIndex& index, const CandidateSet& pool,
                    const RankedList& ranked) {
  trace.candidates.clear();
  std::size_t rank = 1;
  for (const auto& entry : ranked.entries) {
    const Candidate& c = pool.items[entry.candidate];
    trace.candidates.push_back({c.pair_id, index.pair(c.pair_id).reply, c.score, entry.score, rank++});
  }
  trace.global_iterations = ranked.trace.size();
}

}  // namespace

Response respond(ConversationSession& session, std::string_view utterance,
                 const Resources& resources) {
  if (!resources.index || !resources.graph || !resources.patterns || !resources.recognizer ||
      !resources.scorer) {
    throw ConfigError("dialogue resources are incomplete");
  }
  const CorpusIndex& index = *resources.index;
  session.add(Speaker::Human, std::string(utterance));

  ResponseTrace trace;
  trace.context = session.context_window(resources.context_size);
  trace.stalemate = detect_stalemate(*resources.patterns, utterance);
  trace.detected_entities = resources.recognizer->recognize(trace.context);

  auto pool_texts = [&](const CandidateSet& pool) {
    std::vector<std::string> texts;
    for (const auto& c : pool.items) texts.push_back(index.pair(c.pair_id).reply);
    return texts;
  };

  std::optional<RankedList> ranked;
  CandidateSet pool;

  if (trace.stalemate && !trace.detected_entities.empty()) {
    trace.expanded_entities = expand(*resources.graph, trace.detected_entities, resources.expansion_k);
    if (!trace.expanded_entities.empty()) {
      std::vector<WeightedEntity> targets;
      for (const auto& e : trace.detected_entities) targets.push_back({e, kContextEntityWeight});
      targets.insert(targets.end(), trace.expanded_entities.begin(), trace.expanded_entities.end());
      pool = retrieve_candidates(index, trace.context, targets, RetrievalMode::Introducing,
                                 resources.caps);
      if (!pool.items.empty()) {
        const RerankState state =
            build_rerank_state(trace.context, pool_texts(pool), *resources.scorer);
        ranked = bi_pagerank_hits(state, resources.params);
        trace.mode = RetrievalMode::Introducing;
        trace.ranking_method = "bi_pagerank_hits";
      }
    }
  }

  if (!ranked) {
    trace.mode = RetrievalMode::General;
    pool = retrieve_candidates(index, trace.context, {}, RetrievalMode::General, resources.caps);
    if (pool.items.empty()) throw NoReplyError(std::move(trace));
    const RerankState state = build_rerank_state(trace.context, pool_texts(pool), *resources.scorer);
    ranked = rank_baseline(Baseline::Textual, state, resources.params);
    trace.ranking_method = "textual";
  }

  record_ranking(trace, index, pool, *ranked);
  const std::size_t chosen = pool.items[ranked->top()].pair_id;
  trace.chosen_pair_id = chosen;
  trace.reply = index.pair(chosen).reply;
  session.add(Speaker::Computer, trace.reply);
  return {trace.reply, std::move(trace)};
}

}  // namespace topicshift
