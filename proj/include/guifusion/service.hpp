#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "guifusion/store.hpp"

namespace httplib {
class Server;
}

namespace guifusion {

struct StepInput {
  Action action = Action::Tap;
  ComponentId component;
  std::optional<std::string> input_text;
  std::optional<std::string> note;
  bool manual_override = false;
};

struct SubmitResult {
  Step step;
  std::optional<Suggestion> suggestion;  // unset once the history has crashed
  std::optional<std::string> crash;
};

Json to_json(const SubmitResult& result);

/// Reporter-facing operations on top of a Store. Mutations on one session are
/// serialized; distinct sessions proceed independently.
class ReporterService {
 public:
  using Clock = std::function<std::string()>;

  explicit ReporterService(Store& store, Clock clock = {});

  Store& store() { return store_; }

  std::string create_session(const std::string& app_id, const std::string& version);
  ReporterSession session(const std::string& session_id) const;
  Suggestion get_suggestions(const std::string& session_id) const;
  SubmitResult submit_step(const std::string& session_id, const StepInput& input);
  std::optional<Suggestion> undo_last_step(const std::string& session_id);
  std::string finalize(const std::string& session_id, const std::string& title, const std::string& device,
                       const std::string& description);
  void abandon(const std::string& session_id);

  ReplayResult replay(const std::string& report_id, const std::string& version);
  DuplicateResult duplicates_of(const std::string& report_id, const SimilarityConfig& cfg = {});
  std::vector<std::pair<std::string, std::uint64_t>> triage(const std::string& report_id);

 private:
  struct Slot {
    std::mutex mutex;
    ReporterSession session;
  };

  std::shared_ptr<Slot> slot(const std::string& session_id) const;
  static void require_open(const ReporterSession& session);

  Store& store_;
  Clock clock_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

std::string utc_timestamp();

/// HTTP/JSON facade. Errors use {"error": <code>, "message": <text>} with
/// 400 for bad input, 404 for unknown ids, 409 for state conflicts.
class HttpService {
 public:
  explicit HttpService(ReporterService& service);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds to host:port (port 0 picks a free port). Returns the bound port;
  /// throws Error(Io) when binding fails.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void listen();
  void stop();

 private:
  void install_routes();

  ReporterService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace guifusion
