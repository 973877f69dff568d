#include "topicshift/serialization.hpp"

namespace topicshift {

Json to_json(const ResponseTrace& trace) {
  Json j;
  j["mode"] = to_string(trace.mode);
  j["stalemate"] = trace.stalemate;
  j["context"] = trace.context;
  j["detected_entities"] = trace.detected_entities;
  auto& expanded = j["expanded_entities"] = Json::array();
  for (const auto& e : trace.expanded_entities) expanded.push_back({{"entity", e.name}, {"weight", e.weight}});
  j["ranking_method"] = trace.ranking_method;
  j["global_iterations"] = trace.global_iterations;
  auto& candidates = j["candidates"] = Json::array();
  for (const auto& c : trace.candidates) {
    candidates.push_back({{"rank", c.rank},
                          {"pair_id", c.pair_id},
                          {"text", c.text},
                          {"retrieval_score", c.retrieval_score},
                          {"final_score", c.final_score}});
  }
  j["chosen_pair_id"] = trace.chosen_pair_id ? Json(*trace.chosen_pair_id) : Json(nullptr);
  j["reply"] = trace.reply;
  return j;
}

Json to_json(const ConversationSession& session) {
  Json j;
  j["session_id"] = session.id();
  auto& turns = j["utterances"] = Json::array();
  for (const auto& u : session.utterances()) {
    turns.push_back({{"turn", u.turn}, {"speaker", to_string(u.speaker)}, {"text", u.text}});
  }
  return j;
}

Json to_json(const RankedList& ranked, bool include_trace) {
  Json j;
  auto& entries = j["ranking"] = Json::array();
  std::size_t rank = 1;
  for (const auto& e : ranked.entries) {
    entries.push_back({{"rank", rank++}, {"candidate", e.candidate}, {"score", e.score}});
  }
  if (include_trace) {
    auto& trace = j["global_trace"] = Json::array();
    for (const auto& step : ranked.trace) {
      trace.push_back({{"query_pagerank", step.query_pagerank},
                       {"reply_pagerank", step.reply_pagerank},
                       {"hub", step.hub},
                       {"authority", step.authority},
                       {"mean_square_change", step.mean_square_change}});
    }
  }
  return j;
}

Json to_json(const RankParams& p) {
  return {{"mu", p.mu},
          {"alpha_x", p.alpha_x},
          {"alpha_y", p.alpha_y},
          {"local_tol", p.local_tol},
          {"global_tol", p.global_tol},
          {"max_local_iters", p.max_local_iters},
          {"max_global_iters", p.max_global_iters}};
}

}  // namespace topicshift
