// Command-line front end: index, respond, eval, serve, rerank.
//
// Exit codes: 0 success, 1 usage error, 2 data or configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "topicshift/dialogue.hpp"
#include "topicshift/evaluation.hpp"
#include "topicshift/serialization.hpp"
#include "topicshift/service.hpp"
#include "topicshift/strings.hpp"
#include "topicshift/text.hpp"

namespace ts = topicshift;
namespace fs = std::filesystem;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct CommonOptions {
  std::string config;
  std::string corpus;
  std::string index;
  std::string kg;
  std::string patterns;
  std::optional<double> mu;
  std::optional<double> alpha_x;
  std::optional<double> alpha_y;
  std::optional<double> tol;
  std::optional<int> port;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--corpus", o.corpus, "query<TAB>reply corpus file");
  cmd->add_option("--index", o.index, "saved index (instead of --corpus)");
  cmd->add_option("--kg", o.kg, "knowledge graph TSV (head<TAB>tail<TAB>weight)");
  cmd->add_option("--patterns", o.patterns, "stalemate pattern file");
  cmd->add_option("--mu", o.mu, "PageRank restart weight (default 0.15)");
  cmd->add_option("--alpha-x", o.alpha_x, "hub-side Co-HITS weight (default 0.3)");
  cmd->add_option("--alpha-y", o.alpha_y, "authority-side Co-HITS weight (default 1.0)");
  cmd->add_option("--tol", o.tol, "global convergence threshold (default 1e-6)");
}

ts::ServiceConfig make_config(const CommonOptions& o) {
  ts::ServiceConfig c;
  if (!o.config.empty()) c = ts::ServiceConfig::from_file(o.config);
  if (!o.corpus.empty()) {
    c.corpus = o.corpus;
    c.index.clear();
  }
  if (!o.index.empty()) c.index = o.index;
  if (!o.kg.empty()) c.kg = o.kg;
  if (!o.patterns.empty()) c.patterns = o.patterns;
  if (o.mu) c.params.mu = *o.mu;
  if (o.alpha_x) c.params.alpha_x = *o.alpha_x;
  if (o.alpha_y) c.params.alpha_y = *o.alpha_y;
  if (o.tol) c.params.global_tol = *o.tol;
  if (o.port) c.port = *o.port;
  return c;
}

ts::RankParams params_only(const CommonOptions& o) {
  ts::ServiceConfig c;
  if (!o.config.empty()) c = ts::ServiceConfig::from_file(o.config);
  if (o.mu) c.params.mu = *o.mu;
  if (o.alpha_x) c.params.alpha_x = *o.alpha_x;
  if (o.alpha_y) c.params.alpha_y = *o.alpha_y;
  if (o.tol) c.params.global_tol = *o.tol;
  c.params.validate();
  return c.params;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!ts::trim(line).empty()) out.emplace_back(ts::trim(line));
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ts::LoadError("cannot open", path);
  return read_lines(in);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ts::LoadError("cannot write", path.string());
  out << content;
}

int run_index(const CommonOptions& o, const std::string& out) {
  const ts::ServiceConfig c = make_config(o);
  if (c.corpus.empty()) throw ts::ConfigError("index needs --corpus");
  const auto index = ts::CorpusIndex::build(ts::load_corpus(c.corpus));
  index.save(out);
  std::cout << "indexed " << index.size() << " pairs (" << index.stats().documents()
            << " documents) into " << out << "\n";
  return 0;
}

// stdin: one utterance per line, optionally prefixed "human:" or "computer:".
// The last line is the new human utterance.
int run_respond(const CommonOptions& o) {
  const ts::Resources resources = ts::load_resources(make_config(o));
  auto lines = read_lines(std::cin);
  if (lines.empty()) throw ts::InvalidInput("respond expects at least one utterance on stdin");

  auto parse = [](const std::string& line) -> std::pair<ts::Speaker, std::string> {
    const std::string lower = ts::ascii_lower(line);
    if (lower.starts_with("computer:")) return {ts::Speaker::Computer, std::string(ts::trim(line.substr(9)))};
    if (lower.starts_with("human:")) return {ts::Speaker::Human, std::string(ts::trim(line.substr(6)))};
    return {ts::Speaker::Human, line};
  };

  ts::ConversationSession session("cli");
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    auto [speaker, text] = parse(lines[i]);
    session.add(speaker, std::move(text));
  }
  const auto [last_speaker, utterance] = parse(lines.back());
  if (last_speaker != ts::Speaker::Human) throw ts::InvalidInput("the last stdin line must be a human turn");

  try {
    const ts::Response r = ts::respond(session, utterance, resources);
    ts::Json out{{"reply", r.reply}, {"trace", ts::to_json(r.trace)}};
    std::cout << out.dump(2) << "\n";
    return 0;
  } catch (const ts::NoReplyError& e) {
    ts::Json out{{"error", "no_reply"}, {"trace", ts::to_json(e.trace())}};
    std::cout << out.dump(2) << "\n";
    return kDataError;
  }
}

int run_eval(const CommonOptions& o, const std::string& fixtures, const std::string& out_dir,
             std::vector<std::string> methods, std::vector<std::string> groups) {
  const ts::RankParams params = params_only(o);
  if (methods.empty()) methods = ts::all_methods();
  if (groups.empty()) groups = ts::all_groups();
  const auto instances = ts::load_fixtures(fixtures);
  const ts::MetricReport report = ts::run_eval(instances, methods, groups, params);
  const std::string table = report.to_table();
  std::cout << table;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "report.txt", table);
    write_file(fs::path(out_dir) / "report.json", report.to_json().dump(2) + "\n");
  }
  return 0;
}

int run_serve(const CommonOptions& o, const std::string& host, bool no_auto_create) {
  ts::ServiceConfig c = make_config(o);
  if (!host.empty()) c.host = host;
  if (no_auto_create) c.auto_create = false;
  ts::ChatService service(ts::load_resources(c), c.auto_create);
  std::cerr << "listening on " << c.host << ":" << c.port << "\n";
  ts::serve(service, c.host, c.port);
  return 0;
}

int run_rerank(const CommonOptions& o, const std::string& context_path,
               const std::string& candidates_path, const std::string& method) {
  const ts::RankParams params = params_only(o);
  auto context = read_lines(context_path);
  auto candidates = read_lines(candidates_path);
  if (context.empty() || candidates.empty()) throw ts::InvalidInput("rerank needs context and candidates");

  auto stats = std::make_shared<ts::CorpusStats>();
  for (const auto& t : context) stats->add_document(t);
  for (const auto& t : candidates) stats->add_document(t);
  const ts::TfIdfScorer scorer(stats);
  const ts::RerankState state = ts::build_rerank_state(context, candidates, scorer);
  const ts::RankedList ranked = ts::rank_with(method, state, params);

  ts::Json out = ts::to_json(ranked);
  for (auto& row : out["ranking"]) row["text"] = candidates[row["candidate"].get<std::size_t>()];
  out["method"] = method;
  out["params"] = ts::to_json(params);
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proactive retrieval-based conversation engine with bipartite reranking"};
  app.require_subcommand(1);

  CommonOptions common;

  auto* index_cmd = app.add_subcommand("index", "Build and save a corpus index");
  add_common(index_cmd, common);
  std::string index_out;
  index_cmd->add_option("--out", index_out, "output index path")->required();

  auto* respond_cmd = app.add_subcommand("respond", "Reply to the conversation read from stdin");
  add_common(respond_cmd, common);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate ranking methods on labeled fixtures");
  add_common(eval_cmd, common);
  std::string fixtures, out_dir;
  std::vector<std::string> methods, groups;
  eval_cmd->add_option("--fixtures", fixtures, "JSON Lines labeled instances")->required();
  eval_cmd->add_option("--out-dir", out_dir, "write report.txt and report.json here");
  eval_cmd->add_option("--methods", methods, "subset of methods (default: all five)");
  eval_cmd->add_option("--groups", groups, "subset of groups (default: both)");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP chat service");
  add_common(serve_cmd, common);
  std::string host;
  bool no_auto_create = false;
  serve_cmd->add_option("--port", common.port, "listen port (default 8080)");
  serve_cmd->add_option("--host", host, "listen address (default 127.0.0.1)");
  serve_cmd->add_flag("--no-auto-create", no_auto_create, "reject messages to unknown sessions");

  auto* rerank_cmd = app.add_subcommand("rerank", "Rank a candidate file against a context file");
  add_common(rerank_cmd, common);
  std::string context_path, candidates_path, method = "bi_pagerank_hits";
  rerank_cmd->add_option("--context", context_path, "one context utterance per line")->required();
  rerank_cmd->add_option("--candidates", candidates_path, "one candidate reply per line")->required();
  rerank_cmd->add_option("--method", method, "bi_pagerank_hits|textual|reply_pagerank|hits|co_hits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*index_cmd) return run_index(common, index_out);
    if (*respond_cmd) return run_respond(common);
    if (*eval_cmd) return run_eval(common, fixtures, out_dir, methods, groups);
    if (*serve_cmd) return run_serve(common, host, no_auto_create);
    if (*rerank_cmd) return run_rerank(common, context_path, candidates_path, method);
  } catch (const ts::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}
