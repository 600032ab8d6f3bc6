#include "guifusion/store.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <sstream>

#include "guifusion/error.hpp"

namespace fs = std::filesystem;

namespace guifusion {

namespace {

bool safe_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

}  // namespace

std::string_view to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::Open: return "open";
    case SessionStatus::Finalized: return "finalized";
    case SessionStatus::Abandoned: return "abandoned";
  }
  return "open";
}

Json to_json(const ReporterSession& s) {
  Json j = Json::object();
  j["session_id"] = s.session_id;
  j["app_id"] = s.app_id;
  j["version"] = s.version;
  j["status"] = to_string(s.status);
  j["report_id"] = s.report_id ? Json(*s.report_id) : Json(nullptr);
  Json history = Json::array();
  for (const auto& step : s.history) history.push_back(to_json(step));
  j["history"] = std::move(history);
  return j;
}

ReporterSession reporter_session_from_json(const Json& j) {
  ReporterSession s;
  s.session_id = j.at("session_id").get<std::string>();
  s.app_id = j.at("app_id").get<std::string>();
  s.version = j.at("version").get<std::string>();
  const auto status = j.at("status").get<std::string>();
  if (status == "open") {
    s.status = SessionStatus::Open;
  } else if (status == "finalized") {
    s.status = SessionStatus::Finalized;
  } else if (status == "abandoned") {
    s.status = SessionStatus::Abandoned;
  } else {
    throw Error(ErrorCode::Io, "unknown session status \"" + status + "\"");
  }
  if (!j.at("report_id").is_null()) s.report_id = j.at("report_id").get<std::string>();
  for (const auto& step : j.at("history")) s.history.push_back(step_from_json(step));
  return s;
}

Store::Store(fs::path root) : root_(std::move(root)) {
  if (!fs::is_directory(root_)) throw Error(ErrorCode::Io, "store directory " + root_.string() + " does not exist");
}

std::shared_ptr<const AppDatabase> Store::app(const std::string& app_id, const std::string& version) {
  std::lock_guard lock(mutex_);
  auto key = std::make_pair(app_id, version);
  if (auto it = apps_.find(key); it != apps_.end()) return it->second;
  if (!safe_id(app_id) || !safe_id(version)) {
    throw Error(ErrorCode::UnknownApp, "no ripped database for " + app_id + " " + version);
  }
  const auto dir = database_dir(root_, app_id, version);
  if (!fs::is_directory(dir)) throw Error(ErrorCode::UnknownApp, "no ripped database for " + app_id + " " + version);
  auto db = std::make_shared<const AppDatabase>(load_database(dir));
  apps_.emplace(key, db);
  return db;
}

std::vector<std::pair<std::string, std::string>> Store::apps() const {
  std::vector<std::pair<std::string, std::string>> out;
  const auto db_root = root_ / "db";
  if (!fs::is_directory(db_root)) return out;
  for (const auto& app : fs::directory_iterator(db_root)) {
    if (!app.is_directory()) continue;
    for (const auto& version : fs::directory_iterator(app.path())) {
      if (version.is_directory() && fs::exists(version.path() / "efg.json")) {
        out.emplace_back(app.path().filename().string(), version.path().filename().string());
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string Store::next_id(const std::string& counter, const std::string& prefix) {
  std::lock_guard lock(mutex_);
  const auto path = root_ / "counters.json";
  Json counters = fs::exists(path) ? read_json_file(path) : Json::object();
  const auto next = counters.value(counter, std::uint64_t{0}) + 1;
  Json updated = Json::object();
  updated["reports"] = counters.value("reports", std::uint64_t{0});
  updated["sessions"] = counters.value("sessions", std::uint64_t{0});
  updated[counter] = next;
  write_file(path, canonical_dump(updated));
  std::ostringstream id;
  id << prefix << std::setw(6) << std::setfill('0') << next;
  return id.str();
}

std::string Store::next_session_id() { return next_id("sessions", "session-"); }

std::string Store::next_report_id() { return next_id("reports", "report-"); }

void Store::save_session(const ReporterSession& session) {
  write_file(root_ / "sessions" / (session.session_id + ".json"), canonical_dump(to_json(session)));
}

std::vector<ReporterSession> Store::load_sessions() const {
  std::vector<ReporterSession> out;
  const auto dir = root_ / "sessions";
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") out.push_back(reporter_session_from_json(read_json_file(entry.path())));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.session_id < b.session_id; });
  return out;
}

RenderOptions Store::render_options(const BugReport& report) const {
  // Renders live in reports/, screenshots in the ripped database.
  return RenderOptions{"../db/" + report.app_id + "/" + report.app_version + "/screens/"};
}

void Store::save_report(const BugReport& report) {
  if (!safe_id(report.report_id)) throw Error(ErrorCode::InvalidArgument, "invalid report id " + report.report_id);
  const auto dir = root_ / "reports";
  const auto options = render_options(report);
  write_file(dir / (report.report_id + ".json"), canonical_dump(to_json(report)));
  write_file(dir / (report.report_id + ".md"), render_report(report, ReportFormat::Markdown, options));
  write_file(dir / (report.report_id + ".html"), render_report(report, ReportFormat::Html, options));

  const auto screens = database_dir(root_, report.app_id, report.app_version) / "screens";
  if (!fs::is_directory(screens.parent_path())) return;
  const auto db = app(report.app_id, report.app_version);
  for (const auto& [id, svg] : report_screenshots(report, db->model)) {
    const auto path = screens / (id + ".svg");
    if (!fs::exists(path)) write_file(path, svg);
  }
}

BugReport Store::load_report(const std::string& report_id) const {
  const auto path = root_ / "reports" / (report_id + ".json");
  if (!safe_id(report_id) || !fs::exists(path)) throw Error(ErrorCode::UnknownReport, "no report " + report_id);
  return bug_report_from_json(read_json_file(path));
}

std::vector<BugReport> Store::load_reports() const {
  std::vector<BugReport> out;
  const auto dir = root_ / "reports";
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") out.push_back(bug_report_from_json(read_json_file(entry.path())));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.report_id < b.report_id; });
  return out;
}

std::string Store::report_document(const std::string& report_id, ReportFormat format) const {
  const auto report = load_report(report_id);
  return render_report(report, format, render_options(report));
}

OwnershipMap Store::owners() const {
  const auto path = root_ / "owners.json";
  if (!fs::exists(path)) return {};
  return ownership_from_json(read_json_file(path));
}

void Store::save_duplicates(const DuplicateResult& result) {
  write_file(root_ / "duplicates.json", canonical_dump(to_json(result)));
}

std::optional<std::string> Store::screenshot(const std::string& id) const {
  if (!safe_id(id)) return std::nullopt;
  const auto db_root = root_ / "db";
  if (!fs::is_directory(db_root)) return std::nullopt;
  for (const auto& app : fs::directory_iterator(db_root)) {
    if (!app.is_directory()) continue;
    for (const auto& version : fs::directory_iterator(app.path())) {
      const auto path = version.path() / "screens" / (id + ".svg");
      if (fs::exists(path)) return read_file(path);
    }
  }
  return std::nullopt;
}

}  // namespace guifusion
