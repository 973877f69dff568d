#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "topicshift/knowledge_graph.hpp"
#include "topicshift/text.hpp"

namespace topicshift {

struct QueryReplyPair {
  std::size_t id = 0;
  std::string query;
  std::string reply;
};

/// UTF-8 lines of `query<TAB>reply`; ids follow line order, skipping blank lines.
std::vector<QueryReplyPair> load_corpus(const std::filesystem::path& path);

/// Inverted index over query and reply text. Every query text and every
/// reply text counts as one document for the idf statistics.
class CorpusIndex {
 public:
  /// Throws InvalidInput on an empty corpus or ids that are not 0..n-1.
  static CorpusIndex build(std::vector<QueryReplyPair> pairs);

  std::size_t size() const noexcept { return pairs_.size(); }
  const QueryReplyPair& pair(std::size_t id) const { return pairs_.at(id); }
  const std::vector<QueryReplyPair>& pairs() const noexcept { return pairs_; }

  /// Pair ids whose query or reply contains `token`, ascending.
  const std::vector<std::size_t>& postings(const std::string& token) const;

  const CorpusStats& stats() const noexcept { return *stats_; }
  std::shared_ptr<const CorpusStats> shared_stats() const noexcept { return stats_; }

  std::size_t reply_length(std::size_t id) const { return reply_lengths_.at(id); }
  const TfIdfVector& reply_vector(std::size_t id) const { return reply_vectors_.at(id); }

  /// JSON snapshot: pairs plus document statistics.
  void save(const std::filesystem::path& path) const;
  static CorpusIndex load(const std::filesystem::path& path);

 private:
  std::vector<QueryReplyPair> pairs_;
  std::unordered_map<std::string, std::vector<std::size_t>> postings_;
  std::shared_ptr<const CorpusStats> stats_;
  std::vector<std::size_t> reply_lengths_;
  std::vector<TfIdfVector> reply_vectors_;
};

enum class RetrievalMode { Introducing, General };

std::string_view to_string(RetrievalMode m);

struct RetrievalCaps {
  std::size_t per_entity = 10;  // candidates kept per target entity
  std::size_t total = 50;       // candidates kept overall
  std::size_t min_len = 3;      // replies with fewer tokens are dropped
};

struct Candidate {
  std::size_t pair_id = 0;
  double score = 0.0;

  bool operator==(const Candidate&) const = default;
};

struct CandidateSet {
  RetrievalMode mode = RetrievalMode::General;
  std::vector<Candidate> items;  // score descending, id ascending
};

/// Introducing mode: per entity, replies containing it verbatim, scored by
/// tf-idf cosine to the joined context, top `per_entity` kept; merged across
/// entities at the max score. General mode: every reply scored the same way.
/// Both drop short replies first, sort, and truncate to `total`.
/// Throws InvalidInput in introducing mode with no entities.
CandidateSet retrieve_candidates(const CorpusIndex& index, std::span<const std::string> context,
                                 std::span<const WeightedEntity> entities, RetrievalMode mode,
                                 const RetrievalCaps& caps = {});

}  // namespace topicshift
