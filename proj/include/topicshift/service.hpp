#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "topicshift/dialogue.hpp"
#include "topicshift/serialization.hpp"

namespace httplib {
class Server;
}

namespace topicshift {

struct ServiceConfig {
  std::filesystem::path corpus;    // query<TAB>reply file
  std::filesystem::path index;     // alternative to `corpus`: a saved index
  std::filesystem::path kg;
  std::filesystem::path patterns;
  RankParams params;
  RetrievalCaps caps;
  std::string host = "127.0.0.1";
  int port = 8080;
  bool auto_create = true;

  /// Reads a JSON config. Relative paths resolve against the file's directory.
  static ServiceConfig from_file(const std::filesystem::path& path);
  /// Throws ConfigError unless every path exists and every parameter is valid.
  void validate() const;
};

/// Loads corpus (or index), knowledge graph and patterns named by `config`.
Resources load_resources(const ServiceConfig& config);

class SessionNotFound : public Error {
 public:
  explicit SessionNotFound(const std::string& id) : Error("unknown session '" + id + "'") {}
};

/// Session store in front of respond(). Calls on one session run one at a
/// time in arrival order; different sessions proceed independently.
class ChatService {
 public:
  explicit ChatService(Resources resources, bool auto_create = true);

  std::string create_session();
  bool remove_session(const std::string& id);
  std::size_t session_count() const;

  /// Throws SessionNotFound (unknown id with auto-create off) or NoReplyError.
  Response handle_message(const std::string& session_id, std::string_view text);

  /// {"session_id", "reply", "trace"}
  Json handle_message_json(const std::string& session_id, std::string_view text);

  ConversationSession transcript(const std::string& id) const;
  std::optional<ResponseTrace> last_trace(const std::string& id) const;

  const Resources& resources() const noexcept { return resources_; }

 private:
  struct Slot {
    std::mutex mutex;
    std::condition_variable turn;
    std::uint64_t next_ticket = 0;
    std::uint64_t serving = 0;
    bool removed = false;
    ConversationSession session;
    std::optional<ResponseTrace> last;
  };

  std::shared_ptr<Slot> find(const std::string& id, bool create) const;

  Resources resources_;
  bool auto_create_;
  mutable std::mutex sessions_mutex_;
  mutable std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// Registers the JSON API:
///   GET    /health
///   POST   /sessions                      -> {"session_id"}
///   POST   /sessions/{id}/messages        {"text"} -> {"session_id","reply","trace"}
///   GET    /sessions/{id}                 -> transcript
///   GET    /sessions/{id}/trace           -> {"trace"}
///   DELETE /sessions/{id}
///   GET    /kg/neighbors?entity=E&k=5     -> {"entity","neighbors"}
void register_routes(httplib::Server& server, ChatService& service);

/// Blocks serving on host:port until the server stops.
void serve(ChatService& service, const std::string& host, int port);

}  // namespace topicshift
