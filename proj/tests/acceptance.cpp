// Acceptance gate. One line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "reference_solvers.hpp"
#include "topicshift/dialogue.hpp"
#include "topicshift/evaluation.hpp"
#include "topicshift/ranking.hpp"
#include "topicshift/service.hpp"

namespace ts = topicshift;
namespace fs = std::filesystem;

namespace {

const fs::path kData = TOPICSHIFT_DATA_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failures for one criterion; `detail` is printed after the verdict.
struct Check {
  std::vector<std::string> failures;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
  }
};

struct Criterion {
  std::string name;
  std::function<void(Check&)> body;
};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool is_score_vector(const std::vector<double>& v) {
  if (v.empty()) return false;
  double s = 0;
  for (double e : v) {
    if (!(e >= 0.0)) return false;
    s += e;
  }
  return std::abs(s - 1.0) <= 1e-9;
}

bool is_left_stochastic(const ts::Matrix& m) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (std::abs(m.column_sum(c) - 1.0) > 1e-9) return false;
    for (std::size_t r = 0; r < m.rows(); ++r)
      if (m(r, c) < 0) return false;
  }
  return true;
}

ts::RerankState random_state(std::mt19937_64& rng, Eigen::Index nq, Eigen::Index nr) {
  ts::RerankState s;
  s.query_similarity = reference::from_eigen(reference::random_symmetric(rng, nq));
  s.reply_similarity = reference::from_eigen(reference::random_symmetric(rng, nr));
  s.relevance = reference::from_eigen(reference::random_uniform(rng, nq, nr, 0.01, 0.99));
  s.textual = reference::from_eigen(reference::random_uniform(rng, nq, nr, 0.0, 1.0));
  return s;
}

// Solver tolerance matching the oracle's 1e-12 step criterion (MSD of 1e-24).
ts::RankParams oracle_precision() {
  ts::RankParams p;
  p.local_tol = 1e-24;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(TOPICSHIFT_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const ts::Resources& walle() {
  static const ts::Resources r = ts::load_resources(ts::ServiceConfig::from_file(kData / "walle" / "config.json"));
  return r;
}

// --------------------------------------------------------------------------

void oracle_equivalence(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> pr_dim(1, 5), ch_dim(2, 5);
  double worst_pr = 0, worst_ch = 0;

  for (int i = 0; i < 100; ++i) {
    const int n = pr_dim(rng);
    const auto sim = reference::random_symmetric(rng, n);
    const auto prior = reference::random_distribution(rng, n);
    const auto v = ts::pagerank_solve(reference::from_eigen(sim), reference::to_std(prior), oracle_precision());
    const double d = max_abs_diff(v, reference::to_std(reference::pagerank_linear(sim, prior, 0.15)));
    worst_pr = std::max(worst_pr, d);
    c.expect(d <= 1e-8, "pagerank instance " + std::to_string(i) + " differs by " + std::to_string(d));
  }

  for (int i = 0; i < 100; ++i) {
    const int nq = ch_dim(rng), nr = ch_dim(rng);
    const auto w_qr = reference::random_uniform(rng, nq, nr, 0.0, 1.0);
    const auto w_rq = reference::random_uniform(rng, nr, nq, 0.0, 1.0);
    const auto xh = reference::random_distribution(rng, nq);
    const auto yh = reference::random_distribution(rng, nr);
    const auto p = oracle_precision();
    const auto got = ts::co_hits_solve({reference::from_eigen(w_qr), ts::LinkDirection::QueryToReply},
                                       {reference::from_eigen(w_rq), ts::LinkDirection::ReplyToQuery},
                                       reference::to_std(xh), reference::to_std(yh), p);
    const auto want = reference::co_hits_iterate(w_qr, w_rq, xh, yh, p.alpha_x, p.alpha_y, 1e-12);
    const double d = std::max(max_abs_diff(got.hub, reference::to_std(want.x)),
                              max_abs_diff(got.authority, reference::to_std(want.y)));
    worst_ch = std::max(worst_ch, d);
    c.expect(d <= 1e-8, "co_hits instance " + std::to_string(i) + " differs by " + std::to_string(d));
  }

  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 10.0, "runtime " + std::to_string(elapsed) + " s");
  std::ostringstream d;
  d << "max |diff| pagerank=" << worst_pr << " co_hits=" << worst_ch << ", " << elapsed << " s";
  c.detail = d.str();
}

void degenerate_identities(Check& c) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 50; ++i) {
    const int nq = 1 + static_cast<int>(rng() % 5), nr = 1 + static_cast<int>(rng() % 8);
    const auto prior = reference::to_std(reference::random_distribution(rng, nq));
    ts::RankParams restart;
    restart.mu = 1.0;
    c.expect(ts::pagerank_solve(reference::from_eigen(reference::random_symmetric(rng, nq)), prior, restart) == prior,
             "mu=1 did not return the prior");

    const auto state = random_state(rng, nq, nr);
    const auto xh = reference::to_std(reference::random_distribution(rng, nq));
    const auto yh = reference::to_std(reference::random_distribution(rng, nr));
    ts::RankParams frozen;
    frozen.alpha_x = 0.0;
    frozen.alpha_y = 0.0;
    const auto w_qr = ts::hits_weight_matrix(state.relevance, ts::uniform_scores(nq), ts::LinkDirection::QueryToReply);
    const auto w_rq = ts::hits_weight_matrix(state.relevance.transposed(), ts::uniform_scores(nr),
                                             ts::LinkDirection::ReplyToQuery);
    const auto r = ts::co_hits_solve(w_qr, w_rq, xh, yh, frozen);
    c.expect(r.hub == xh && r.authority == yh, "alpha=0 did not return the priors");

    ts::RankParams unit;
    unit.alpha_x = 1.0;
    unit.alpha_y = 1.0;
    const auto hits = ts::rank_baseline(ts::Baseline::Hits, state, {});
    const auto co = ts::co_hits_solve(w_qr, w_rq, ts::uniform_scores(nq), ts::uniform_scores(nr), unit);
    c.expect(hits.scores == co.authority, "hits differs from co_hits with alpha=1");
    c.expect(hits.order() == ts::rank_baseline(ts::Baseline::CoHits, state, unit).order(),
             "hits ranking differs from co_hits baseline with alpha=1");
  }
  c.detail = "50 instances, compared with ==";
}

void convergence(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5150);
  std::uniform_int_distribution<int> nq_dist(1, 10), nr_dist(1, 50);
  std::vector<std::size_t> iters;
  for (int i = 0; i < 100; ++i) {
    const auto state = random_state(rng, nq_dist(rng), nr_dist(rng));
    try {
      const auto ranked = ts::bi_pagerank_hits(state, {});
      iters.push_back(ranked.trace.size());
      c.expect(ranked.trace.back().mean_square_change < 1e-6, "final change above global_tol");
    } catch (const ts::ConvergenceError& e) {
      c.expect(false, std::string("instance ") + std::to_string(i) + ": " + e.what());
      iters.push_back(1000);
    }
  }
  std::sort(iters.begin(), iters.end());
  const double median = (iters[49] + iters[50]) / 2.0;
  const double elapsed = seconds_since(t0);
  c.expect(iters.back() <= 20, "max global iterations " + std::to_string(iters.back()));
  c.expect(median <= 8, "median global iterations " + std::to_string(median));
  c.expect(elapsed < 30.0, "runtime " + std::to_string(elapsed) + " s");

  std::map<std::size_t, int> histogram;
  for (auto k : iters) ++histogram[k];
  std::ostringstream d;
  d << "median=" << median << " max=" << iters.back() << " histogram{";
  bool first = true;
  for (auto [k, n] : histogram) {
    d << (first ? "" : " ") << k << ":" << n;
    first = false;
  }
  d << "} " << elapsed << " s";
  c.detail = d.str();
}

void normalization(Check& c) {
  std::mt19937_64 rng(404);
  std::size_t vectors = 0, matrices = 0;
  auto vec = [&](const std::vector<double>& v, const std::string& what) {
    ++vectors;
    c.expect(is_score_vector(v), what + " is not a score vector");
  };
  auto mat = [&](const ts::Matrix& m, const std::string& what) {
    ++matrices;
    c.expect(is_left_stochastic(m), what + " is not left-stochastic");
  };

  for (int i = 0; i < 60; ++i) {
    const int nq = 1 + static_cast<int>(rng() % 6), nr = 1 + static_cast<int>(rng() % 12);
    const auto state = random_state(rng, nq, nr);

    auto raw = reference::random_uniform(rng, nq, nr, 0.0, 1.0);
    if (i % 2 == 0) raw.col(0).setZero();
    mat(ts::column_normalize(reference::from_eigen(raw)), "column_normalize");
    mat(ts::propagation_operator(reference::from_eigen(raw)), "propagation_operator");
    mat(ts::column_normalize(state.reply_similarity), "column_normalize(M_r)");

    const auto priors = ts::compute_priors(state.textual);
    vec(priors.hub, "prior x");
    vec(priors.authority, "prior y");
    vec(ts::pagerank_solve(state.query_similarity, ts::uniform_scores(nq), {}), "pagerank q");

    const auto ranked = ts::bi_pagerank_hits(state, {});
    vec(ranked.scores, "bi_pagerank_hits scores");
    for (const auto& step : ranked.trace) {
      for (const auto* v : {&step.query_prior, &step.reply_prior, &step.query_pagerank, &step.reply_pagerank,
                            &step.hub, &step.authority})
        vec(*v, "trace vector");
    }
    for (auto b : {ts::Baseline::Textual, ts::Baseline::ReplyPageRank, ts::Baseline::Hits, ts::Baseline::CoHits})
      vec(ts::rank_baseline(b, state, {}).scores, std::string(ts::to_string(b)) + " scores");
  }

  ts::ConversationSession s;
  for (const char* u : {"你看过机器人总动员吗", "啊…", "Have you seen WALL-E?", "Errr", "I like movies"}) {
    const auto r = ts::respond(s, u, walle());
    std::vector<double> finals;
    for (const auto& cand : r.trace.candidates) finals.push_back(cand.final_score);
    vec(finals, std::string("pipeline scores for '") + u + "'");
  }
  c.detail = std::to_string(vectors) + " vectors, " + std::to_string(matrices) + " matrices";
}

void pipeline(Check& c) {
  auto has_expanded = [](const ts::ResponseTrace& t) {
    for (const auto& e : t.expanded_entities)
      if (t.reply.find(e.name) != std::string::npos) return true;
    return false;
  };
  std::ostringstream d;

  ts::ConversationSession en;
  en.add(ts::Speaker::Human, "Have you seen WALL-E?");
  en.add(ts::Speaker::Computer, "WALL-E is my favorite Pixar movie");
  const auto intro = ts::respond(en, "Errr", walle());
  c.expect(intro.trace.mode == ts::RetrievalMode::Introducing, "Errr after WALL-E is not introducing");
  c.expect(has_expanded(intro.trace), "reply '" + intro.reply + "' has no expanded entity");
  d << "Errr after entity -> " << ts::to_string(intro.trace.mode) << " '" << intro.reply << "'; ";

  ts::ConversationSession zh;
  zh.add(ts::Speaker::Human, "你看过机器人总动员吗");
  zh.add(ts::Speaker::Computer, "我不是瓦力，我没有伊娃");
  const auto intro_zh = ts::respond(zh, "啊…", walle());
  c.expect(intro_zh.trace.mode == ts::RetrievalMode::Introducing, "啊… after 机器人总动员 is not introducing");
  c.expect(has_expanded(intro_zh.trace), "reply '" + intro_zh.reply + "' has no expanded entity");

  ts::ConversationSession empty;
  const auto no_entity = ts::respond(empty, "Errr", walle());
  c.expect(no_entity.trace.stalemate, "Errr not detected as stalemate");
  c.expect(no_entity.trace.mode == ts::RetrievalMode::General, "Errr without entity is not general");
  d << "Errr without entity -> " << ts::to_string(no_entity.trace.mode) << "; ";

  ts::ConversationSession plain;
  plain.add(ts::Speaker::Human, "Have you seen WALL-E?");
  plain.add(ts::Speaker::Computer, "WALL-E is my favorite Pixar movie");
  const auto ordinary = ts::respond(plain, "I like movies", walle());
  c.expect(!ordinary.trace.stalemate && ordinary.trace.mode == ts::RetrievalMode::General,
           "non-stalemate utterance is not general");
  d << "non-stalemate -> " << ts::to_string(ordinary.trace.mode);
  c.detail = d.str();
}

void metrics(Check& c) {
  const std::vector<std::size_t> ranking{0, 1, 2};
  const auto m = ts::compute_metrics(ranking, {{0, 1}, {1, 0}, {2, 1}});
  c.expect(m.p1 == 1.0, "p@1");
  c.expect(std::abs(m.ap - 0.8333333333333333) <= 1e-6, "AP " + std::to_string(m.ap));
  c.expect(std::abs(m.ndcg - 0.9197207891481876) <= 1e-6, "nDCG " + std::to_string(m.ndcg));

  const auto fixtures = ts::load_fixtures(kData / "eval" / "labeled.jsonl");
  c.expect(fixtures.size() == 12, "fixture has " + std::to_string(fixtures.size()) + " instances");
  const auto report = ts::run_eval(fixtures, ts::all_methods(), ts::all_groups());
  c.expect(report.to_table() == slurp(kData / "eval" / "golden" / "report.txt"), "table differs from golden");
  c.expect(report.to_json().dump(2) + "\n" == slurp(kData / "eval" / "golden" / "report.json"),
           "json differs from golden");
  c.expect(report.cells.size() == 10, "grid is not 2 x 5");
  for (std::size_t g = 0; g < 2; ++g)
    for (std::size_t k = 0; k < 5 && g * 5 + k < report.cells.size(); ++k) {
      const auto& cell = report.cells[g * 5 + k];
      c.expect(cell.group == ts::all_groups()[g] && cell.method == ts::all_methods()[k], "grid order");
    }
  std::ostringstream d;
  d << "AP=" << m.ap << " nDCG=" << m.ndcg << ", golden report matches, " << report.cells.size() << " cells";
  c.detail = d.str();
}

void retrieval(Check& c) {
  // 8 entities x 14 replies each: 112 matching pairs
  std::vector<ts::QueryReplyPair> pairs;
  std::vector<ts::WeightedEntity> targets;
  for (int e = 0; e < 8; ++e) {
    const std::string name = "实体" + std::to_string(e) + "号";
    targets.push_back({name, 1.0});
    for (int i = 0; i < 14; ++i) {
      std::string reply = "we talked about " + name + " for a while " + std::to_string(i);
      if (i % 4 == 0) reply += " robot movie";
      pairs.push_back({pairs.size(), "q", reply});
    }
  }
  for (int i = 0; i < 20; ++i) pairs.push_back({pairs.size(), "q", "robot movie without any target " + std::to_string(i)});
  const auto index = ts::CorpusIndex::build(pairs);
  const std::vector<std::string> context{"robot movie"};

  const std::vector<ts::WeightedEntity> one{targets[0]};
  const auto single = ts::retrieve_candidates(index, context, one, ts::RetrievalMode::Introducing);
  c.expect(single.items.size() == 10, "per-entity cap: got " + std::to_string(single.items.size()));

  const auto all = ts::retrieve_candidates(index, context, targets, ts::RetrievalMode::Introducing);
  c.expect(all.items.size() == 50, "total cap: got " + std::to_string(all.items.size()));
  std::map<std::string, int> per_entity;
  for (const auto& cand : all.items) {
    const auto& reply = index.pair(cand.pair_id).reply;
    bool hit = false;
    for (const auto& t : targets) {
      if (reply.find(t.name) != std::string::npos) {
        hit = true;
        ++per_entity[t.name];
      }
    }
    c.expect(hit, "candidate without a target entity: " + reply);
  }
  for (const auto& [name, n] : per_entity) c.expect(n <= 10, name + " contributed " + std::to_string(n));

  // the shipped fixture too
  ts::ConversationSession s;
  s.add(ts::Speaker::Human, "Have you seen WALL-E?");
  const auto r = ts::respond(s, "Errr", walle());
  for (const auto& cand : r.trace.candidates) {
    bool hit = false;
    for (const auto& e : r.trace.detected_entities) hit |= cand.text.find(e) != std::string::npos;
    for (const auto& e : r.trace.expanded_entities) hit |= cand.text.find(e.name) != std::string::npos;
    c.expect(hit, "fixture candidate without a target entity: " + cand.text);
  }
  c.detail = "per-entity " + std::to_string(single.items.size()) + "/10, total " + std::to_string(all.items.size()) +
             "/50";
}

void determinism(Check& c) {
  const fs::path tmp = fs::temp_directory_path() / "topicshift_acceptance";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  const std::string fixtures = (kData / "eval" / "labeled.jsonl").string();
  const auto e1 = run_cli("eval --fixtures " + fixtures + " --out-dir " + (tmp / "a").string());
  const auto e2 = run_cli("eval --fixtures " + fixtures + " --out-dir " + (tmp / "b").string());
  c.expect(e1.code == 0 && e2.code == 0, "eval exit codes " + std::to_string(e1.code) + "," + std::to_string(e2.code));
  c.expect(e1.out == e2.out, "eval stdout differs");
  for (const char* f : {"report.txt", "report.json"})
    c.expect(slurp(tmp / "a" / f) == slurp(tmp / "b" / f), std::string(f) + " differs");

  {
    std::ofstream in(tmp / "conversation.txt");
    in << "human: 你看过机器人总动员吗\ncomputer: 我不是瓦力，我没有伊娃\n啊…\n";
  }
  const std::string respond = "respond --config " + (kData / "walle" / "config.json").string() + " < " +
                              (tmp / "conversation.txt").string();
  const auto r1 = run_cli(respond);
  const auto r2 = run_cli(respond);
  c.expect(r1.code == 0 && r2.code == 0, "respond exit codes");
  c.expect(!r1.out.empty() && r1.out == r2.out, "respond output differs");
  c.detail = "eval " + std::to_string(e1.out.size()) + " bytes, respond " + std::to_string(r1.out.size()) +
             " bytes, identical";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"fixed-point oracle equivalence (100 + 100 instances, 1e-8, < 10 s)", oracle_equivalence},
      {"degenerate identities (mu=1, alpha=0, hits == co_hits at alpha=1)", degenerate_identities},
      {"global convergence (100 instances, max <= 20, median <= 8, < 30 s)", convergence},
      {"normalization of every score vector and column-normalized matrix", normalization},
      {"pipeline branches on the shipped fixture", pipeline},
      {"metric hand values and golden report", metrics},
      {"retrieval entity containment and caps", retrieval},
      {"byte-identical eval and respond runs", determinism},
  };

  int failed = 0;
  for (const auto& criterion : criteria) {
    Check c;
    try {
      criterion.body(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = c.failures.empty();
    failed += !ok;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << criterion.name;
    if (!c.detail.empty()) std::cout << " -- " << c.detail;
    std::cout << "\n";
    for (const auto& f : c.failures) std::cout << "       " << f << "\n";
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
