#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "topicshift/knowledge_graph.hpp"
#include "topicshift/ranking.hpp"
#include "topicshift/retrieval.hpp"

namespace topicshift {

enum class Speaker { Human, Computer };

std::string_view to_string(Speaker s);

struct Utterance {
  Speaker speaker = Speaker::Human;
  std::string text;
  std::size_t turn = 0;
};

class ConversationSession {
 public:
  explicit ConversationSession(std::string id = {}) : id_(std::move(id)) {}

  const std::string& id() const noexcept { return id_; }
  const std::vector<Utterance>& utterances() const noexcept { return utterances_; }
  std::size_t size() const noexcept { return utterances_.size(); }

  void add(Speaker speaker, std::string text);
  void pop_back();

  /// Texts of the last `n` utterances, oldest first.
  std::vector<std::string> context_window(std::size_t n = 4) const;

 private:
  std::string id_;
  std::vector<Utterance> utterances_;
  std::size_t next_turn_ = 0;
};

/// Contentless-utterance filters. Literals match the whole trimmed utterance;
/// `re:` lines are ECMAScript regexes that must match it in full. Both are
/// case-insensitive for ASCII.
class PatternSet {
 public:
  /// One pattern per line, `#` comments and blank lines ignored. Throws
  /// ConfigError on an invalid regex or an empty set.
  static PatternSet load(const std::filesystem::path& path);
  static PatternSet from_lines(const std::vector<std::string>& lines,
                               std::string_view origin = "<patterns>");

  bool matches(std::string_view utterance) const;
  std::size_t size() const noexcept { return literals_.size() + regexes_.size(); }

 private:
  std::vector<std::string> literals_;  // stored lowercased
  std::vector<std::regex> regexes_;
};

bool detect_stalemate(const PatternSet& patterns, std::string_view utterance);

/// Everything respond() reads. Shared, immutable.
struct Resources {
  std::shared_ptr<const CorpusIndex> index;
  std::shared_ptr<const EntityGraph> graph;
  std::shared_ptr<const PatternSet> patterns;
  std::shared_ptr<const EntityRecognizer> recognizer;  // defaults to dictionary matching
  std::shared_ptr<const TextScorer> scorer;            // defaults to tf-idf over the corpus
  RankParams params;
  RetrievalCaps caps;
  std::size_t context_size = 4;
  std::size_t expansion_k = 5;

  /// Fills the default recognizer and scorer; throws ConfigError when a
  /// required resource is missing.
  static Resources assemble(std::shared_ptr<const CorpusIndex> index,
                            std::shared_ptr<const EntityGraph> graph,
                            std::shared_ptr<const PatternSet> patterns, RankParams params = {},
                            RetrievalCaps caps = {});
};

struct TracedCandidate {
  std::size_t pair_id = 0;
  std::string text;
  double retrieval_score = 0.0;
  double final_score = 0.0;
  std::size_t rank = 0;  // 1-based, in final order
};

struct ResponseTrace {
  RetrievalMode mode = RetrievalMode::General;
  bool stalemate = false;
  std::vector<std::string> context;
  std::vector<std::string> detected_entities;
  std::vector<WeightedEntity> expanded_entities;
  std::string ranking_method;                // "bi_pagerank_hits" or "textual"
  std::vector<TracedCandidate> candidates;   // final rank order
  std::size_t global_iterations = 0;         // 0 for single-pass methods
  std::optional<std::size_t> chosen_pair_id;
  std::string reply;
};

/// No candidate survived retrieval in either mode. Carries the partial trace.
class NoReplyError : public Error {
 public:
  explicit NoReplyError(ResponseTrace trace)
      : Error("no candidate reply available"), trace_(std::move(trace)) {}
  const ResponseTrace& trace() const noexcept { return trace_; }

 private:
  ResponseTrace trace_;
};

struct Response {
  std::string reply;
  ResponseTrace trace;
};

/// Appends the human utterance, decides between content introducing and
/// general mode, retrieves and reranks candidates, and appends the chosen
/// computer reply. On NoReplyError the human turn stays in the session.
Response respond(ConversationSession& session, std::string_view utterance,
                 const Resources& resources);

}  // namespace topicshift
