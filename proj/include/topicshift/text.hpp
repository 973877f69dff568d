#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "topicshift/ranking.hpp"

namespace topicshift {

using TokenSequence = std::vector<std::string>;

/// Splits on whitespace and punctuation, lowercases ASCII, and turns each
/// contiguous run of CJK characters into overlapping character bigrams (a
/// lone CJK character is emitted as itself).
TokenSequence tokenize(std::string_view text);

/// Sparse tf-idf weights keyed by token. Ordered so dot products sum in a
/// fixed order regardless of argument order.
using TfIdfVector = std::map<std::string, double>;

/// Document frequencies over a declared document set.
/// idf(t) = ln((N + 1) / (df(t) + 1)) + 1
class CorpusStats {
 public:
  CorpusStats() = default;
  explicit CorpusStats(const std::vector<std::string>& documents);
  CorpusStats(std::size_t documents, std::unordered_map<std::string, std::size_t> df);

  void add_document(std::string_view text);

  std::size_t documents() const noexcept { return documents_; }
  std::size_t document_frequency(const std::string& token) const;
  double idf(const std::string& token) const;
  const std::unordered_map<std::string, std::size_t>& document_frequencies() const noexcept {
    return df_;
  }

  TfIdfVector vectorize(std::string_view text) const;
  TfIdfVector vectorize(const TokenSequence& tokens) const;

 private:
  std::size_t documents_ = 0;
  std::unordered_map<std::string, std::size_t> df_;
};

/// Cosine of two tf-idf vectors, clamped to [0,1]. Zero if either is empty.
double cosine(const TfIdfVector& a, const TfIdfVector& b);

/// Jaccard overlap of the token sets; zero when both are empty.
double token_jaccard(const TokenSequence& a, const TokenSequence& b);

double similarity(std::string_view a, std::string_view b, const CorpusStats& stats);

inline constexpr double kRelevanceEpsilon = 0.01;

/// eps + (1 - 2 eps) * (cosine + jaccard) / 2, strictly inside (0,1).
double relevance_phi(std::string_view q, std::string_view r, const CorpusStats& stats);

/// Scoring interface behind the rerank graph. Swap in a learned relevance
/// model by implementing this.
class TextScorer {
 public:
  virtual ~TextScorer() = default;
  /// Sim(a, b) in [0,1]; builds M_q, M_r and the prior matrix.
  virtual double similarity(std::string_view a, std::string_view b) const = 0;
  /// phi(q, r) in (0,1); builds the HITS links.
  virtual double relevance(std::string_view query, std::string_view reply) const = 0;
};

class TfIdfScorer : public TextScorer {
 public:
  explicit TfIdfScorer(std::shared_ptr<const CorpusStats> stats);

  double similarity(std::string_view a, std::string_view b) const override;
  double relevance(std::string_view query, std::string_view reply) const override;

  const CorpusStats& stats() const noexcept { return *stats_; }

 private:
  std::shared_ptr<const CorpusStats> stats_;
};

/// Assembles M_q, M_r (zero diagonal), phi and Sim for one rerank call.
RerankState build_rerank_state(std::vector<std::string> queries,
                               std::vector<std::string> candidates, const TextScorer& scorer);

}  // namespace topicshift
