#include "topicshift/service.hpp"

#include <fstream>

#include "httplib.h"

namespace topicshift {

namespace fs = std::filesystem;

ServiceConfig ServiceConfig::from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const char* key) -> fs::path {
    if (!doc.contains(key)) return {};
    fs::path p = doc[key].get<std::string>();
    return p.is_absolute() ? p : base / p;
  };

  ServiceConfig c;
  try {
    c.corpus = resolve("corpus");
    c.index = resolve("index");
    c.kg = resolve("kg");
    c.patterns = resolve("patterns");
    if (doc.contains("params")) {
      const auto& p = doc["params"];
      c.params.mu = p.value("mu", c.params.mu);
      c.params.alpha_x = p.value("alpha_x", c.params.alpha_x);
      c.params.alpha_y = p.value("alpha_y", c.params.alpha_y);
      c.params.local_tol = p.value("local_tol", c.params.local_tol);
      c.params.global_tol = p.value("global_tol", c.params.global_tol);
      c.params.max_local_iters = p.value("max_local_iters", c.params.max_local_iters);
      c.params.max_global_iters = p.value("max_global_iters", c.params.max_global_iters);
    }
    if (doc.contains("caps")) {
      const auto& k = doc["caps"];
      c.caps.per_entity = k.value("per_entity", c.caps.per_entity);
      c.caps.total = k.value("total", c.caps.total);
      c.caps.min_len = k.value("min_len", c.caps.min_len);
    }
    c.host = doc.value("host", c.host);
    c.port = doc.value("port", c.port);
    c.auto_create = doc.value("auto_create", c.auto_create);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid config " + path.string() + ": " + e.what());
  }
  return c;
}

void ServiceConfig::validate() const {
  if (corpus.empty() && index.empty()) throw ConfigError("config names neither a corpus nor an index");
  auto require = [](const fs::path& p, const char* what) {
    if (p.empty()) throw ConfigError(std::string("config is missing the ") + what + " path");
    if (!fs::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
  };
  if (!index.empty()) require(index, "index");
  else require(corpus, "corpus");
  require(kg, "knowledge graph");
  require(patterns, "pattern file");
  if (port < 0 || port > 65535) throw ConfigError("port out of range");
  if (caps.per_entity == 0 || caps.total == 0) throw ConfigError("retrieval caps must be positive");
  try {
    params.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

Resources load_resources(const ServiceConfig& config) {
  config.validate();
  auto index = std::make_shared<const CorpusIndex>(
      config.index.empty() ? CorpusIndex::build(load_corpus(config.corpus))
                           : CorpusIndex::load(config.index));
  auto graph = std::make_shared<const EntityGraph>(EntityGraph::load(config.kg));
  auto patterns = std::make_shared<const PatternSet>(PatternSet::load(config.patterns));
  return Resources::assemble(std::move(index), std::move(graph), std::move(patterns), config.params,
                             config.caps);
}

ChatService::ChatService(Resources resources, bool auto_create)
    : resources_(std::move(resources)), auto_create_(auto_create) {}

std::string ChatService::create_session() {
  std::lock_guard lock(sessions_mutex_);
  std::string id;
  do {
    id = "s" + std::to_string(next_id_++);
  } while (sessions_.contains(id));
  auto slot = std::make_shared<Slot>();
  slot->session = ConversationSession(id);
  sessions_.emplace(id, std::move(slot));
  return id;
}

bool ChatService::remove_session(const std::string& id) {
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return false;
    slot = it->second;
    sessions_.erase(it);
  }
  std::lock_guard lock(slot->mutex);
  slot->removed = true;
  return true;
}

std::size_t ChatService::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<ChatService::Slot> ChatService::find(const std::string& id, bool create) const {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it != sessions_.end()) return it->second;
  if (!create || id.empty()) throw SessionNotFound(id);
  auto slot = std::make_shared<Slot>();
  slot->session = ConversationSession(id);
  sessions_.emplace(id, slot);
  return slot;
}

Response ChatService::handle_message(const std::string& session_id, std::string_view text) {
  const auto slot = find(session_id, auto_create_);

  std::unique_lock lock(slot->mutex);
  const std::uint64_t ticket = slot->next_ticket++;
  slot->turn.wait(lock, [&] { return slot->serving == ticket; });
  struct Advance {
    Slot& s;
    ~Advance() {
      ++s.serving;
      s.turn.notify_all();
    }
  } advance{*slot};

  if (slot->removed) throw SessionNotFound(session_id);
  try {
    Response r = respond(slot->session, text, resources_);
    slot->last = r.trace;
    return r;
  } catch (const NoReplyError& e) {
    slot->last = e.trace();
    throw;
  }
}

Json ChatService::handle_message_json(const std::string& session_id, std::string_view text) {
  const Response r = handle_message(session_id, text);
  return {{"session_id", session_id}, {"reply", r.reply}, {"trace", to_json(r.trace)}};
}

ConversationSession ChatService::transcript(const std::string& id) const {
  const auto slot = find(id, false);
  std::lock_guard lock(slot->mutex);
  return slot->session;
}

std::optional<ResponseTrace> ChatService::last_trace(const std::string& id) const {
  const auto slot = find(id, false);
  std::lock_guard lock(slot->mutex);
  return slot->last;
}

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  send_json(res, {{"error", code}, {"message", message}}, status);
}

}  // namespace

void register_routes(httplib::Server& server, ChatService& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/health", [&service](const httplib::Request&, httplib::Response& res) {
    const auto& r = service.resources();
    send_json(res, {{"status", "ok"},
                    {"pairs", r.index->size()},
                    {"entities", r.graph->vocabulary().size()},
                    {"sessions", service.session_count()}});
  });

  server.Post("/sessions", [&service](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"session_id", service.create_session()}}, 201);
  });

  server.Post(R"(/sessions/([^/]+)/messages)",
              [&service](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                std::string text;
                try {
                  const auto body = nlohmann::json::parse(req.body);
                  text = body.at("text").get<std::string>();
                } catch (const nlohmann::json::exception&) {
                  send_error(res, 400, "bad_request", "expected a JSON body with a \"text\" string");
                  return;
                }
                try {
                  send_json(res, service.handle_message_json(id, text));
                } catch (const SessionNotFound& e) {
                  send_error(res, 404, "not_found", e.what());
                } catch (const NoReplyError& e) {
                  send_json(res,
                            {{"error", "no_reply"}, {"message", e.what()}, {"trace", to_json(e.trace())}},
                            422);
                } catch (const Error& e) {
                  send_error(res, 500, "internal", e.what());
                }
              });

  server.Get(R"(/sessions/([^/]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    try {
      send_json(res, to_json(service.transcript(req.matches[1])));
    } catch (const SessionNotFound& e) {
      send_error(res, 404, "not_found", e.what());
    }
  });

  server.Get(R"(/sessions/([^/]+)/trace)",
             [&service](const httplib::Request& req, httplib::Response& res) {
               try {
                 const auto trace = service.last_trace(req.matches[1]);
                 if (!trace) {
                   send_error(res, 404, "no_trace", "session has no responses yet");
                   return;
                 }
                 send_json(res, {{"trace", to_json(*trace)}});
               } catch (const SessionNotFound& e) {
                 send_error(res, 404, "not_found", e.what());
               }
             });

  server.Delete(R"(/sessions/([^/]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    if (service.remove_session(req.matches[1])) {
      res.status = 204;
    } else {
      send_error(res, 404, "not_found", "unknown session '" + std::string(req.matches[1]) + "'");
    }
  });

  server.Get("/kg/neighbors", [&service](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("entity")) {
      send_error(res, 400, "bad_request", "missing 'entity' parameter");
      return;
    }
    const std::string entity = req.get_param_value("entity");
    std::size_t k = 5;
    if (req.has_param("k")) {
      try {
        k = std::stoul(req.get_param_value("k"));
      } catch (const std::exception&) {
        k = 0;
      }
      if (k == 0) {
        send_error(res, 400, "bad_request", "'k' must be a positive integer");
        return;
      }
    }
    Json neighbors = Json::array();
    for (const auto& n : service.resources().graph->related(entity, k)) {
      neighbors.push_back({{"entity", n.name}, {"weight", n.weight}});
    }
    send_json(res, {{"entity", entity}, {"neighbors", neighbors}});
  });
}

void serve(ChatService& service, const std::string& host, int port) {
  httplib::Server server;
  register_routes(server, service);
  if (!server.listen(host, port)) {
    throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
  }
}

}  // namespace topicshift
