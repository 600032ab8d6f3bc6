#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "guifusion/maintenance.hpp"

namespace guifusion {

enum class SessionStatus { Open, Finalized, Abandoned };

std::string_view to_string(SessionStatus status);

struct ReporterSession {
  std::string session_id;
  std::string app_id;
  std::string version;
  std::vector<Step> history;
  SessionStatus status = SessionStatus::Open;
  std::optional<std::string> report_id;

  friend bool operator==(const ReporterSession&, const ReporterSession&) = default;
};

Json to_json(const ReporterSession& session);
ReporterSession reporter_session_from_json(const Json& json);

/// File-backed store rooted at one directory:
///
///   db/<app>/<version>/...   ripped databases (see write_database)
///   reports/<id>.{json,md,html}
///   sessions/<id>.json
///   owners.json              developer -> activity -> count
///   counters.json            monotonic id counters
///   duplicates.json          last dedup run
///
/// All files use canonical serialization. Thread-safe.
class Store {
 public:
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// Throws Error(UnknownApp) when (app, version) was never ripped.
  std::shared_ptr<const AppDatabase> app(const std::string& app_id, const std::string& version);
  std::vector<std::pair<std::string, std::string>> apps() const;

  std::string next_session_id();
  std::string next_report_id();

  void save_session(const ReporterSession& session);
  std::vector<ReporterSession> load_sessions() const;

  /// Writes the canonical JSON plus markdown/html renders and any
  /// screenshots the report references that the database lacks.
  void save_report(const BugReport& report);
  BugReport load_report(const std::string& report_id) const;  // Error(UnknownReport)
  std::vector<BugReport> load_reports() const;                 // sorted by id
  std::string report_document(const std::string& report_id, ReportFormat format) const;
  RenderOptions render_options(const BugReport& report) const;

  OwnershipMap owners() const;  // empty when owners.json is absent

  void save_duplicates(const DuplicateResult& result);

  std::optional<std::string> screenshot(const std::string& id) const;

 private:
  std::string next_id(const std::string& counter, const std::string& prefix);

  std::filesystem::path root_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::shared_ptr<const AppDatabase>> apps_;
};

}  // namespace guifusion
