#include "topicshift/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace topicshift {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Self-normalize a nonnegative vector; no mass means uniform.
ScoreVector normalize_or_uniform(std::vector<double> v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(total > 0.0)) return uniform_scores(v.size());
  for (double& e : v) e /= total;
  return v;
}

void require_nonnegative(const Matrix& m, std::string_view what) {
  for (double e : m.data()) {
    if (!std::isfinite(e) || e < 0.0) {
      throw InvalidInput(std::string(what) + ": entries must be finite and nonnegative");
    }
  }
}

}  // namespace

void RankParams::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(mu)) throw InvalidInput("mu must lie in [0,1]");
  if (!unit(alpha_x) || !unit(alpha_y)) throw InvalidInput("alpha_x and alpha_y must lie in [0,1]");
  if (!(local_tol > 0.0) || !(global_tol > 0.0)) throw InvalidInput("tolerances must be positive");
  if (max_local_iters == 0 || max_global_iters == 0) {
    throw InvalidInput("iteration caps must be positive");
  }
}

double mean_square_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("mean_square_difference: length mismatch");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

void require_score_vector(std::span<const double> v, std::string_view what) {
  if (v.empty()) throw InvalidInput(std::string(what) + ": empty score vector");
  double total = 0.0;
  for (double e : v) {
    if (!std::isfinite(e) || e < 0.0) {
      throw InvalidInput(std::string(what) + ": score entries must be finite and nonnegative");
    }
    total += e;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidInput(std::string(what) + ": scores sum to " + std::to_string(total) +
                       ", expected 1");
  }
}

ScoreVector uniform_scores(std::size_t n) {
  return ScoreVector(n, n ? 1.0 / static_cast<double>(n) : 0.0);
}

Matrix column_normalize(const Matrix& m) {
  require_nonnegative(m, "column_normalize");
  Matrix out = m;
  if (m.rows() == 0) return out;
  const double uniform = 1.0 / static_cast<double>(m.rows());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const double total = m.column_sum(c);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      out(r, c) = total > 0.0 ? m(r, c) / total : uniform;
    }
  }
  return out;
}

Matrix propagation_operator(const Matrix& w) {
  return column_normalize(column_normalize(w).transposed());
}

ScoreVector pagerank_solve(const Matrix& sim, std::span<const double> prior,
                           const RankParams& params) {
  params.validate();
  if (!sim.is_square() || sim.empty()) {
    throw InvalidInput("pagerank_solve: similarity matrix must be square and nonempty, got " +
                       shape(sim));
  }
  if (prior.size() != sim.rows()) {
    throw InvalidInput("pagerank_solve: prior has " + std::to_string(prior.size()) +
                       " entries for a " + shape(sim) + " graph");
  }
  require_nonnegative(sim, "pagerank_solve");
  for (std::size_t i = 0; i < sim.rows(); ++i) {
    for (std::size_t j = i + 1; j < sim.cols(); ++j) {
      if (std::abs(sim(i, j) - sim(j, i)) > 1e-12 * std::max(1.0, std::abs(sim(i, j)))) {
        throw InvalidInput("pagerank_solve: similarity matrix must be symmetric");
      }
    }
  }
  require_score_vector(prior, "pagerank_solve prior");

  const std::size_t n = sim.rows();
  // [Diag(prior) sim^T]
  Matrix weighted(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) weighted(i, j) = prior[i] * sim(j, i);
  const Matrix transition = column_normalize(weighted);

  const double walk = 1.0 - params.mu;
  ScoreVector v(prior.begin(), prior.end());
  double residual = 0.0;
  for (std::size_t it = 1; it <= params.max_local_iters; ++it) {
    ScoreVector next = transition.apply(v);
    for (std::size_t i = 0; i < n; ++i) next[i] = walk * next[i] + params.mu * prior[i];
    residual = mean_square_difference(next, v);
    v = std::move(next);
    if (residual < params.local_tol) return v;
  }
  throw ConvergenceError("pagerank_solve did not converge", std::move(v), residual,
                         params.max_local_iters);
}

std::string_view to_string(LinkDirection d) {
  return d == LinkDirection::QueryToReply ? "query->reply" : "reply->query";
}

LinkMatrix hits_weight_matrix(const Matrix& phi, std::span<const double> source_scores,
                              LinkDirection direction) {
  if (source_scores.size() != phi.rows()) {
    throw InvalidInput("hits_weight_matrix: " + std::to_string(source_scores.size()) +
                       " source scores for a " + shape(phi) + " " +
                       std::string(to_string(direction)) + " relevance matrix");
  }
  require_nonnegative(phi, "hits_weight_matrix");
  LinkMatrix out{phi, direction};
  for (std::size_t i = 0; i < phi.rows(); ++i)
    for (std::size_t j = 0; j < phi.cols(); ++j) out.weights(i, j) = phi(i, j) * source_scores[i];
  return out;
}

Priors compute_priors(const Matrix& sim_qr) {
  if (sim_qr.empty()) throw InvalidInput("compute_priors: empty similarity matrix");
  require_nonnegative(sim_qr, "compute_priors");
  const double nq = static_cast<double>(sim_qr.rows());
  const double nr = static_cast<double>(sim_qr.cols());
  std::vector<double> hub(sim_qr.rows(), 0.0);
  std::vector<double> authority(sim_qr.cols(), 0.0);
  for (std::size_t i = 0; i < sim_qr.rows(); ++i) {
    for (std::size_t j = 0; j < sim_qr.cols(); ++j) {
      hub[i] += sim_qr(i, j);
      authority[j] += sim_qr(i, j);
    }
  }
  for (double& h : hub) h /= nr;
  for (double& a : authority) a /= nq;
  return {normalize_or_uniform(std::move(hub)), normalize_or_uniform(std::move(authority))};
}

HubAuthority co_hits_solve(const LinkMatrix& query_to_reply, const LinkMatrix& reply_to_query,
                           std::span<const double> hub_prior,
                           std::span<const double> authority_prior, const RankParams& params,
                           const HubAuthority* start) {
  params.validate();
  if (query_to_reply.direction != LinkDirection::QueryToReply ||
      reply_to_query.direction != LinkDirection::ReplyToQuery) {
    throw InvalidInput("co_hits_solve: link matrices passed in the wrong orientation");
  }
  const Matrix& w_qr = query_to_reply.weights;
  const Matrix& w_rq = reply_to_query.weights;
  const std::size_t nq = w_qr.rows();
  const std::size_t nr = w_qr.cols();
  if (nq == 0 || nr == 0 || w_rq.rows() != nr || w_rq.cols() != nq) {
    throw InvalidInput("co_hits_solve: link matrices " + shape(w_qr) + " and " + shape(w_rq) +
                       " do not describe the same bipartite graph");
  }
  if (hub_prior.size() != nq || authority_prior.size() != nr) {
    throw InvalidInput("co_hits_solve: prior lengths do not match the graph");
  }
  require_score_vector(hub_prior, "co_hits_solve hub prior");
  require_score_vector(authority_prior, "co_hits_solve authority prior");

  const Matrix to_hubs = propagation_operator(w_rq);         // nq x nr
  const Matrix to_authorities = propagation_operator(w_qr);  // nr x nq

  HubAuthority state;
  if (start) {
    if (start->hub.size() != nq || start->authority.size() != nr) {
      throw InvalidInput("co_hits_solve: starting point has the wrong shape");
    }
    state.hub = start->hub;
    state.authority = start->authority;
  } else {
    state.hub.assign(hub_prior.begin(), hub_prior.end());
    state.authority.assign(authority_prior.begin(), authority_prior.end());
  }

  const double ax = params.alpha_x, ay = params.alpha_y;
  double residual = 0.0;
  for (std::size_t it = 1; it <= params.max_local_iters; ++it) {
    ScoreVector x = to_hubs.apply(state.authority);
    for (std::size_t i = 0; i < nq; ++i) x[i] = ax * x[i] + (1.0 - ax) * hub_prior[i];
    ScoreVector y = to_authorities.apply(x);
    for (std::size_t j = 0; j < nr; ++j) y[j] = ay * y[j] + (1.0 - ay) * authority_prior[j];

    residual = mean_square_difference(concat(x, y), concat(state.hub, state.authority));
    state.hub = std::move(x);
    state.authority = std::move(y);
    state.iterations = it;
    if (residual < params.local_tol) return state;
  }
  throw ConvergenceError("co_hits_solve did not converge", concat(state.hub, state.authority),
                         residual, params.max_local_iters);
}

void RerankState::validate() const {
  const std::size_t nq = relevance.rows();
  const std::size_t nr = relevance.cols();
  if (nq == 0 || nr == 0) throw InvalidInput("rerank state needs at least one query and one candidate");
  if (query_similarity.rows() != nq || query_similarity.cols() != nq) {
    throw InvalidInput("query similarity is " + shape(query_similarity) + ", expected " +
                       std::to_string(nq) + "x" + std::to_string(nq));
  }
  if (reply_similarity.rows() != nr || reply_similarity.cols() != nr) {
    throw InvalidInput("reply similarity is " + shape(reply_similarity) + ", expected " +
                       std::to_string(nr) + "x" + std::to_string(nr));
  }
  if (textual.rows() != nq || textual.cols() != nr) {
    throw InvalidInput("textual similarity is " + shape(textual) + ", expected " + shape(relevance));
  }
  if (!query_texts.empty() && query_texts.size() != nq) throw InvalidInput("query text count mismatch");
  if (!candidate_texts.empty() && candidate_texts.size() != nr) {
    throw InvalidInput("candidate text count mismatch");
  }
  for (double p : relevance.data()) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidInput("relevance entries must lie strictly in (0,1)");
  }
  for (double s : textual.data()) {
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidInput("textual similarity must lie in [0,1]");
  }
  require_nonnegative(query_similarity, "query similarity");
  require_nonnegative(reply_similarity, "reply similarity");
}

std::size_t RankedList::top() const {
  if (entries.empty()) throw InvalidInput("empty ranked list");
  return entries.front().candidate;
}

std::vector<std::size_t> RankedList::order() const {
  std::vector<std::size_t> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.candidate);
  return out;
}

RankedList rank_by_scores(ScoreVector scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RankedList out;
  out.entries.reserve(idx.size());
  for (std::size_t i : idx) out.entries.push_back({i, scores[i]});
  out.scores = std::move(scores);
  return out;
}

RankedList bi_pagerank_hits(const RerankState& state, const RankParams& params) {
  params.validate();
  state.validate();
  const std::size_t nq = state.num_queries();
  const std::size_t nr = state.num_candidates();

  const Priors priors = compute_priors(state.textual);
  const Matrix relevance_rq = state.relevance.transposed();

  HubAuthority scores{priors.hub, priors.authority, 0};
  LinkMatrix w_qr;
  LinkMatrix w_rq = hits_weight_matrix(relevance_rq, uniform_scores(nr), LinkDirection::ReplyToQuery);
  std::vector<double> previous = concat(scores.hub, scores.authority);
  std::vector<GlobalIteration> trace;
  double change = 0.0;

  for (std::size_t k = 1; k <= params.max_global_iters; ++k) {
    GlobalIteration step;
    step.query_prior = k == 1 ? uniform_scores(nq) : scores.hub;
    step.query_pagerank = pagerank_solve(state.query_similarity, step.query_prior, params);
    w_qr = hits_weight_matrix(state.relevance, step.query_pagerank, LinkDirection::QueryToReply);
    scores = co_hits_solve(w_qr, w_rq, priors.hub, priors.authority, params, &scores);

    step.reply_prior = k == 1 ? uniform_scores(nr) : scores.authority;
    step.reply_pagerank = pagerank_solve(state.reply_similarity, step.reply_prior, params);
    w_rq = hits_weight_matrix(relevance_rq, step.reply_pagerank, LinkDirection::ReplyToQuery);
    scores = co_hits_solve(w_qr, w_rq, priors.hub, priors.authority, params, &scores);

    std::vector<double> current = concat(scores.hub, scores.authority);
    change = mean_square_difference(current, previous);
    step.hub = scores.hub;
    step.authority = scores.authority;
    step.mean_square_change = change;
    trace.push_back(std::move(step));
    previous = std::move(current);

    if (change < params.global_tol) {
      RankedList out = rank_by_scores(scores.authority);
      out.trace = std::move(trace);
      return out;
    }
  }
  throw GlobalConvergenceError("bi_pagerank_hits did not converge", std::move(previous), change,
                               std::move(trace));
}

std::string_view to_string(Baseline b) {
  switch (b) {
    case Baseline::Textual: return "textual";
    case Baseline::ReplyPageRank: return "reply_pagerank";
    case Baseline::Hits: return "hits";
    case Baseline::CoHits: return "co_hits";
  }
  return "unknown";
}

Baseline parse_baseline(std::string_view label) {
  for (Baseline b : {Baseline::Textual, Baseline::ReplyPageRank, Baseline::Hits, Baseline::CoHits}) {
    if (to_string(b) == label) return b;
  }
  throw InvalidInput("unknown ranking method '" + std::string(label) + "'");
}

RankedList rank_baseline(Baseline method, const RerankState& state, const RankParams& params) {
  params.validate();
  state.validate();
  const std::size_t nq = state.num_queries();
  const std::size_t nr = state.num_candidates();

  switch (method) {
    case Baseline::Textual: {
      std::vector<double> mean(nr, 0.0);
      for (std::size_t i = 0; i < nq; ++i)
        for (std::size_t j = 0; j < nr; ++j) mean[j] += state.relevance(i, j);
      for (double& m : mean) m /= static_cast<double>(nq);
      return rank_by_scores(normalize_or_uniform(std::move(mean)));
    }
    case Baseline::ReplyPageRank:
      return rank_by_scores(pagerank_solve(state.reply_similarity, uniform_scores(nr), params));
    case Baseline::Hits:
    case Baseline::CoHits: {
      const LinkMatrix w_qr =
          hits_weight_matrix(state.relevance, uniform_scores(nq), LinkDirection::QueryToReply);
      const LinkMatrix w_rq = hits_weight_matrix(state.relevance.transposed(), uniform_scores(nr),
                                                 LinkDirection::ReplyToQuery);
      if (method == Baseline::Hits) {
        RankParams pure = params;
        pure.alpha_x = 1.0;
        pure.alpha_y = 1.0;
        return rank_by_scores(
            co_hits_solve(w_qr, w_rq, uniform_scores(nq), uniform_scores(nr), pure).authority);
      }
      const Priors priors = compute_priors(state.textual);
      return rank_by_scores(
          co_hits_solve(w_qr, w_rq, priors.hub, priors.authority, params).authority);
    }
  }
  throw InvalidInput("unknown ranking method");
}

}  // namespace topicshift
