#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "topicshift/dialogue.hpp"
#include "topicshift/evaluation.hpp"
#include "topicshift/ranking.hpp"
#include "topicshift/serialization.hpp"
#include "topicshift/service.hpp"
#include "topicshift/text.hpp"

namespace py = pybind11;
namespace ts = topicshift;

using Rows = std::vector<std::vector<double>>;

namespace {

Rows to_rows(const ts::Matrix& m) {
  Rows out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

ts::LinkDirection parse_direction(const std::string& d) {
  if (d == "query->reply" || d == "query_to_reply") return ts::LinkDirection::QueryToReply;
  if (d == "reply->query" || d == "reply_to_query") return ts::LinkDirection::ReplyToQuery;
  throw ts::InvalidInput("direction must be 'query->reply' or 'reply->query'");
}

py::object from_json(const ts::Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

// Owns the resources and the session store behind a Python object.
class Engine {
 public:
  Engine(const std::string& corpus, const std::string& kg, const std::string& patterns,
         const ts::RankParams& params) {
    ts::ServiceConfig c;
    c.corpus = corpus;
    c.kg = kg;
    c.patterns = patterns;
    c.params = params;
    service_ = std::make_unique<ts::ChatService>(ts::load_resources(c), true);
  }

  static std::unique_ptr<Engine> from_config(const std::string& path) {
    auto e = std::unique_ptr<Engine>(new Engine());
    const auto c = ts::ServiceConfig::from_file(path);
    e->service_ = std::make_unique<ts::ChatService>(ts::load_resources(c), c.auto_create);
    return e;
  }

  std::string new_session() { return service_->create_session(); }

  py::object respond(const std::string& session, const std::string& text) {
    ts::Json j;
    {
      py::gil_scoped_release release;
      j = service_->handle_message_json(session, text);
    }
    return from_json(j);
  }

  py::object transcript(const std::string& session) {
    return from_json(ts::to_json(service_->transcript(session)));
  }

 private:
  Engine() = default;
  std::unique_ptr<ts::ChatService> service_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of the topicshift conversation engine";

  auto base = py::register_exception<ts::Error>(m, "Error");
  py::register_exception<ts::ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<ts::NoReplyError>(m, "NoReplyError", base.ptr());
  py::register_exception<ts::SessionNotFound>(m, "SessionNotFound", base.ptr());

  py::class_<ts::RankParams>(m, "RankParams")
      .def(py::init([](double mu, double alpha_x, double alpha_y, double local_tol,
                       double global_tol, std::size_t max_local_iters,
                       std::size_t max_global_iters) {
             ts::RankParams p{mu, alpha_x, alpha_y, local_tol, global_tol, max_local_iters,
                              max_global_iters};
             p.validate();
             return p;
           }),
           py::arg("mu") = 0.15, py::arg("alpha_x") = 0.3, py::arg("alpha_y") = 1.0,
           py::arg("local_tol") = 1e-9, py::arg("global_tol") = 1e-6,
           py::arg("max_local_iters") = 1000, py::arg("max_global_iters") = 100)
      .def_readwrite("mu", &ts::RankParams::mu)
      .def_readwrite("alpha_x", &ts::RankParams::alpha_x)
      .def_readwrite("alpha_y", &ts::RankParams::alpha_y)
      .def_readwrite("local_tol", &ts::RankParams::local_tol)
      .def_readwrite("global_tol", &ts::RankParams::global_tol)
      .def_readwrite("max_local_iters", &ts::RankParams::max_local_iters)
      .def_readwrite("max_global_iters", &ts::RankParams::max_global_iters);

  py::class_<ts::CorpusStats, std::shared_ptr<ts::CorpusStats>>(m, "CorpusStats")
      .def(py::init<const std::vector<std::string>&>(), py::arg("documents"))
      .def_property_readonly("documents", &ts::CorpusStats::documents)
      .def("idf", &ts::CorpusStats::idf)
      .def("document_frequency", &ts::CorpusStats::document_frequency);

  m.def("tokenize", &ts::tokenize, py::arg("text"));
  m.def("similarity", [](const std::string& a, const std::string& b,
                         const ts::CorpusStats& s) { return ts::similarity(a, b, s); });
  m.def("relevance_phi", [](const std::string& q, const std::string& r,
                            const ts::CorpusStats& s) { return ts::relevance_phi(q, r, s); });

  m.def("column_normalize",
        [](const Rows& rows) { return to_rows(ts::column_normalize(ts::Matrix::from_rows(rows))); });
  m.def(
      "pagerank_solve",
      [](const Rows& sim, const std::vector<double>& prior, const ts::RankParams& p) {
        return ts::pagerank_solve(ts::Matrix::from_rows(sim), prior, p);
      },
      py::arg("sim"), py::arg("prior"), py::arg("params") = ts::RankParams{});
  m.def(
      "hits_weight_matrix",
      [](const Rows& phi, const std::vector<double>& scores, const std::string& direction) {
        return to_rows(
            ts::hits_weight_matrix(ts::Matrix::from_rows(phi), scores, parse_direction(direction))
                .weights);
      },
      py::arg("phi"), py::arg("source_scores"), py::arg("direction") = "query->reply");
  m.def("compute_priors", [](const Rows& sim_qr) {
    const auto p = ts::compute_priors(ts::Matrix::from_rows(sim_qr));
    return py::make_tuple(p.hub, p.authority);
  });
  m.def(
      "co_hits_solve",
      [](const Rows& w_qr, const Rows& w_rq, const std::vector<double>& x_hat,
         const std::vector<double>& y_hat, const ts::RankParams& p) {
        const auto r = ts::co_hits_solve({ts::Matrix::from_rows(w_qr), ts::LinkDirection::QueryToReply},
                                         {ts::Matrix::from_rows(w_rq), ts::LinkDirection::ReplyToQuery},
                                         x_hat, y_hat, p);
        return py::make_tuple(r.hub, r.authority);
      },
      py::arg("w_qr"), py::arg("w_rq"), py::arg("x_hat"), py::arg("y_hat"),
      py::arg("params") = ts::RankParams{});

  m.def(
      "rerank",
      [](const std::vector<std::string>& queries, const std::vector<std::string>& candidates,
         const std::string& method, const ts::RankParams& p) {
        auto stats = std::make_shared<ts::CorpusStats>();
        for (const auto& t : queries) stats->add_document(t);
        for (const auto& t : candidates) stats->add_document(t);
        const ts::TfIdfScorer scorer(stats);
        const auto ranked = ts::rank_with(method, ts::build_rerank_state(queries, candidates, scorer), p);
        std::vector<std::pair<std::size_t, double>> out;
        for (const auto& e : ranked.entries) out.emplace_back(e.candidate, e.score);
        return out;
      },
      py::arg("queries"), py::arg("candidates"), py::arg("method") = "bi_pagerank_hits",
      py::arg("params") = ts::RankParams{},
      "Rank candidate replies against context utterances; returns (index, score) best first.");

  m.def("detect_stalemate", [](const std::vector<std::string>& patterns, const std::string& text) {
    return ts::detect_stalemate(ts::PatternSet::from_lines(patterns), text);
  });

  m.def("compute_metrics", [](const std::vector<std::size_t>& ranking,
                              const std::map<std::size_t, int>& labels) {
    const auto r = ts::compute_metrics(ranking, labels);
    return py::make_tuple(r.p1, r.ap, r.ndcg);
  });

  m.def(
      "run_eval",
      [](const std::string& fixtures, std::vector<std::string> methods,
         std::vector<std::string> groups, const ts::RankParams& p) {
        if (methods.empty()) methods = ts::all_methods();
        if (groups.empty()) groups = ts::all_groups();
        const auto instances = ts::load_fixtures(fixtures);
        return from_json(ts::run_eval(instances, methods, groups, p).to_json());
      },
      py::arg("fixtures"), py::arg("methods") = std::vector<std::string>{},
      py::arg("groups") = std::vector<std::string>{}, py::arg("params") = ts::RankParams{});

  py::class_<Engine>(m, "Engine")
      .def(py::init<const std::string&, const std::string&, const std::string&, const ts::RankParams&>(),
           py::arg("corpus"), py::arg("kg"), py::arg("patterns"), py::arg("params") = ts::RankParams{})
      .def_static("from_config", &Engine::from_config, py::arg("path"))
      .def("new_session", &Engine::new_session)
      .def("respond", &Engine::respond, py::arg("session"), py::arg("text"))
      .def("transcript", &Engine::transcript, py::arg("session"));
}
