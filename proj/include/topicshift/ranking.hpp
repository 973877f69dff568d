#pragma once

// Random-walk reranking over the query/reply bipartite graph.
//
// Queries (context utterances) are hubs, candidate replies are authorities.
// Each side is scored by PageRank with a prior over its own similarity graph,
// and the two sides exchange mass through Co-HITS updates over relevance
// links. bi_pagerank_hits alternates the two until the hub/authority scores
// stop moving.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topicshift/errors.hpp"
#include "topicshift/matrix.hpp"

namespace topicshift {

struct RankParams {
  double mu = 0.15;       // PageRank restart weight on the prior
  double alpha_x = 0.3;   // hub-side link weight in Co-HITS
  double alpha_y = 1.0;   // authority-side link weight in Co-HITS
  double local_tol = 1e-9;
  double global_tol = 1e-6;
  std::size_t max_local_iters = 1000;
  std::size_t max_global_iters = 100;

  /// Throws InvalidInput when a field is out of range.
  void validate() const;
};

/// Mean of squared elementwise differences. Inputs must be the same length.
double mean_square_difference(std::span<const double> a, std::span<const double> b);

/// Throws InvalidInput unless `v` is nonempty, nonnegative and sums to 1 within 1e-9.
void require_score_vector(std::span<const double> v, std::string_view what);

ScoreVector uniform_scores(std::size_t n);

/// Scales every column to sum to 1. All-zero columns become uniform.
/// Throws InvalidInput on a negative or non-finite entry.
Matrix column_normalize(const Matrix& m);

/// The cross-side transition [[W]^T]: column-normalize W, transpose, then
/// column-normalize again. Maps scores on W's row side to W's column side.
Matrix propagation_operator(const Matrix& w);

/// Fixed point of v <- (1-mu) [Diag(prior) sim^T] v + mu prior.
/// Stops once the mean-square change between iterates drops below
/// params.local_tol; throws ConvergenceError after max_local_iters.
ScoreVector pagerank_solve(const Matrix& sim, std::span<const double> prior,
                           const RankParams& params);

enum class LinkDirection { QueryToReply, ReplyToQuery };

std::string_view to_string(LinkDirection d);

/// Unnormalized HITS weights tagged with the side their rows belong to.
/// QueryToReply: rows are queries, columns replies. ReplyToQuery: the reverse.
struct LinkMatrix {
  Matrix weights;
  LinkDirection direction = LinkDirection::QueryToReply;
};

/// W_ij = phi_ij * source_scores_i. `phi` must already be oriented with the
/// source side on the rows (query x reply for QueryToReply, reply x query
/// for ReplyToQuery).
LinkMatrix hits_weight_matrix(const Matrix& phi, std::span<const double> source_scores,
                              LinkDirection direction);

struct Priors {
  ScoreVector hub;        // x_hat, one entry per query
  ScoreVector authority;  // y_hat, one entry per reply
};

/// Hub prior proportional to each query's mean similarity to all replies,
/// authority prior to each reply's mean similarity to all queries. A vector
/// with no mass falls back to uniform.
Priors compute_priors(const Matrix& sim_qr);

struct HubAuthority {
  ScoreVector hub;
  ScoreVector authority;
  std::size_t iterations = 0;
};

/// Co-HITS with priors:
///   x <- alpha_x [[W_rq]^T] y + (1 - alpha_x) x_hat
///   y <- alpha_y [[W_qr]^T] x + (1 - alpha_y) y_hat
/// Updates are sequential (y sees the fresh x) and start from `start` when
/// given, else from the priors. Converged when the mean-square change of the
/// concatenated (x, y) is below params.local_tol.
HubAuthority co_hits_solve(const LinkMatrix& query_to_reply, const LinkMatrix& reply_to_query,
                           std::span<const double> hub_prior,
                           std::span<const double> authority_prior, const RankParams& params,
                           const HubAuthority* start = nullptr);

/// The bipartite problem instance for one rerank call.
struct RerankState {
  std::vector<std::string> query_texts;
  std::vector<std::string> candidate_texts;
  Matrix query_similarity;  // M_q, queries x queries
  Matrix reply_similarity;  // M_r, replies x replies
  Matrix relevance;         // phi, queries x replies, entries in (0,1)
  Matrix textual;           // Sim, queries x replies, entries in [0,1]

  std::size_t num_queries() const noexcept { return relevance.rows(); }
  std::size_t num_candidates() const noexcept { return relevance.cols(); }

  /// Throws InvalidInput on inconsistent shapes or out-of-range entries.
  void validate() const;
};

struct RankedEntry {
  std::size_t candidate = 0;  // index into RerankState::candidate_texts
  double score = 0.0;
};

/// Snapshot at the end of one global Bi-PageRank-HITS iteration.
struct GlobalIteration {
  ScoreVector query_prior;
  ScoreVector reply_prior;
  ScoreVector query_pagerank;  // q
  ScoreVector reply_pagerank;  // r
  ScoreVector hub;             // x
  ScoreVector authority;       // y
  double mean_square_change = 0.0;
};

struct RankedList {
  std::vector<RankedEntry> entries;     // best first
  ScoreVector scores;                   // final score per candidate index
  std::vector<GlobalIteration> trace;   // empty for single-pass methods

  std::size_t top() const;
  std::vector<std::size_t> order() const;
};

/// Bi-PageRank-HITS failed to settle within max_global_iters.
class GlobalConvergenceError : public ConvergenceError {
 public:
  GlobalConvergenceError(const std::string& message, std::vector<double> last_iterate,
                         double residual, std::vector<GlobalIteration> trace)
      : ConvergenceError(message, std::move(last_iterate), residual, trace.size()),
        trace_(std::move(trace)) {}

  const std::vector<GlobalIteration>& trace() const noexcept { return trace_; }

 private:
  std::vector<GlobalIteration> trace_;
};

/// Sorts candidates by score descending, ties by ascending index.
RankedList rank_by_scores(ScoreVector scores);

/// Alternates per-side PageRank and Co-HITS until the mean-square change of
/// the concatenated hub/authority scores between global iterations falls
/// below params.global_tol. Candidates are ranked by their authority score.
///
/// Iteration k: the query prior is uniform for k = 1, else the last hub
/// scores; PageRank over queries; rebuild W_qr from q; Co-HITS. Then the reply
/// prior (uniform for k = 1, else the last authority scores); PageRank over
/// replies; rebuild W_rq from r; Co-HITS. W_rq starts from a uniform r.
RankedList bi_pagerank_hits(const RerankState& state, const RankParams& params);

enum class Baseline { Textual, ReplyPageRank, Hits, CoHits };

std::string_view to_string(Baseline b);
/// Throws InvalidInput for an unknown label.
Baseline parse_baseline(std::string_view label);

/// textual: mean relevance over queries. reply_pagerank: PageRank over M_r
/// with a uniform prior. hits: Co-HITS with both alphas at 1 and uniform
/// source scores. co_hits: Co-HITS with params' alphas, uniform source scores
/// and priors from compute_priors.
RankedList rank_baseline(Baseline method, const RerankState& state, const RankParams& params);

}  // namespace topicshift
