#include <httplib.h>

#include "guifusion/error.hpp"
#include "guifusion/service.hpp"

namespace guifusion {

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownApp:
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownReport:
    case ErrorCode::UnknownScreenshot:
      return 404;
    case ErrorCode::SessionClosed:
    case ErrorCode::HistoryHitsCrash:
      return 409;
    case ErrorCode::Io:
      return 500;
    default:
      return 400;
  }
}

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(canonical_dump(body), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  Json body = Json::object();
  body["error"] = code;
  body["message"] = message;
  send_json(res, body, status);
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    auto body = Json::parse(req.body);
    if (!body.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    return body;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed JSON body: ") + e.what());
  }
}

std::string string_field(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw Error(ErrorCode::InvalidArgument, std::string("field \"") + key + "\" must be a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string_field(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::InvalidArgument, std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

// Wraps a handler so library errors become uniform error bodies.
template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), error_name(e.code()), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "InvalidArgument", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  };
}

}  // namespace

HttpService::HttpService(ReporterService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  // No SO_REUSEPORT: a second server on a busy port must fail to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  install_routes();
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpService::listen() { server_->listen_after_bind(); }

void HttpService::stop() {
  if (server_) server_->stop();
}

void HttpService::install_routes() {
  auto& srv = *server_;
  auto& svc = service_;

  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  srv.Get("/api/apps", guarded([&svc](const httplib::Request&, httplib::Response& res) {
    Json apps = Json::array();
    for (const auto& [app, version] : svc.store().apps()) {
      Json a = Json::object();
      a["app_id"] = app;
      a["version"] = version;
      apps.push_back(std::move(a));
    }
    send_json(res, apps);
  }));

  srv.Post("/api/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto id = svc.create_session(string_field(body, "app_id"), string_field(body, "version"));
    Json out = Json::object();
    out["session_id"] = id;
    out["suggestion"] = to_json(svc.get_suggestions(id));
    send_json(res, out, 201);
  }));

  srv.Get(R"(/api/sessions/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, to_json(svc.session(req.matches[1])));
  }));

  srv.Get(R"(/api/sessions/([^/]+)/suggestions)",
          guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            send_json(res, to_json(svc.get_suggestions(req.matches[1])));
          }));

  srv.Post(R"(/api/sessions/([^/]+)/steps)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    StepInput input;
    const auto action_text = string_field(body, "action");
    const auto action = parse_action(action_text);
    if (!action) throw Error(ErrorCode::InvalidStep, "unknown action \"" + action_text + "\"");
    input.action = *action;
    input.component = string_field(body, "component");
    input.input_text = optional_string_field(body, "input_text");
    input.note = optional_string_field(body, "note");
    input.manual_override = body.value("manual_override", false);
    send_json(res, to_json(svc.submit_step(req.matches[1], input)), 201);
  }));

  srv.Delete(R"(/api/sessions/([^/]+)/steps/last)",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               auto suggestion = svc.undo_last_step(req.matches[1]);
               Json out = Json::object();
               out["suggestion"] = suggestion ? to_json(*suggestion) : Json(nullptr);
               send_json(res, out);
             }));

  srv.Post(R"(/api/sessions/([^/]+)/finalize)",
           guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const auto body = parse_body(req);
             const auto id = svc.finalize(req.matches[1], string_field(body, "title"),
                                          string_field(body, "device"), string_field(body, "description"));
             Json out = Json::object();
             out["report_id"] = id;
             send_json(res, out, 201);
           }));

  srv.Post(R"(/api/sessions/([^/]+)/abandon)",
           guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             svc.abandon(req.matches[1]);
             send_json(res, to_json(svc.session(req.matches[1])));
           }));

  srv.Get("/api/reports", guarded([&svc](const httplib::Request&, httplib::Response& res) {
    Json list = Json::array();
    for (const auto& r : svc.store().load_reports()) {
      Json item = Json::object();
      item["report_id"] = r.report_id;
      item["title"] = r.title;
      item["app_id"] = r.app_id;
      item["app_version"] = r.app_version;
      item["created_at"] = r.created_at;
      item["steps"] = r.steps.size();
      list.push_back(std::move(item));
    }
    send_json(res, list);
  }));

  srv.Get(R"(/api/reports/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const auto format_text = req.has_param("format") ? req.get_param_value("format") : std::string("json");
    const auto format = parse_report_format(format_text);
    if (!format) throw Error(ErrorCode::InvalidArgument, "unknown format \"" + format_text + "\"");
    const auto document = svc.store().report_document(req.matches[1], *format);
    switch (*format) {
      case ReportFormat::Json: res.set_content(document, "application/json"); break;
      case ReportFormat::Markdown: res.set_content(document, "text/markdown; charset=utf-8"); break;
      case ReportFormat::Html: res.set_content(document, "text/html; charset=utf-8"); break;
    }
  }));

  srv.Post(R"(/api/reports/([^/]+)/replay)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    send_json(res, to_json(svc.replay(req.matches[1], string_field(body, "version"))));
  }));

  srv.Get(R"(/api/reports/([^/]+)/duplicates)",
          guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            SimilarityConfig cfg;
            if (req.has_param("tau")) {
              try {
                cfg.tau = std::stod(req.get_param_value("tau"));
              } catch (const std::exception&) {
                throw Error(ErrorCode::InvalidArgument, "tau must be a number");
              }
            }
            send_json(res, to_json(svc.duplicates_of(req.matches[1], cfg)));
          }));

  srv.Get(R"(/api/reports/([^/]+)/triage)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, to_json(svc.triage(req.matches[1])));
  }));

  srv.Get(R"(/api/screenshots/([^/]+)\.svg)",
          guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            auto svg = svc.store().screenshot(req.matches[1]);
            if (!svg) throw Error(ErrorCode::UnknownScreenshot, "no screenshot " + std::string(req.matches[1]));
            res.set_content(*svg, "image/svg+xml");
          }));
}

}  // namespace guifusion
