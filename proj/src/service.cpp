#include "guifusion/service.hpp"

#include <chrono>
#include <ctime>

#include "guifusion/error.hpp"

namespace guifusion {

namespace {

std::optional<std::string> crash_of(std::span<const EventToken> history, const EventFlowGraph& efg) {
  Fingerprint current = efg.cold_start;
  for (const auto& event : history) {
    const auto* edge = efg.find_edge(current, event);
    if (!edge) return std::nullopt;
    if (edge->to.is_crash()) return edge->to.crash;
    current = *edge->to.state;
  }
  return std::nullopt;
}

Suggestion suggestions_for(const ReporterSession& s, const AppDatabase& db) {
  return suggest_next(s.history, db.efg, db.ngram, db.universe);
}

}  // namespace

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json to_json(const SubmitResult& r) {
  Json j = Json::object();
  j["step"] = to_json(r.step);
  j["suggestion"] = r.suggestion ? to_json(*r.suggestion) : Json(nullptr);
  j["crash"] = r.crash ? Json(*r.crash) : Json(nullptr);
  return j;
}

ReporterService::ReporterService(Store& store, Clock clock)
    : store_(store), clock_(clock ? std::move(clock) : Clock(utc_timestamp)) {
  for (auto& session : store_.load_sessions()) {
    auto slot = std::make_shared<Slot>();
    auto id = session.session_id;
    slot->session = std::move(session);
    sessions_.emplace(std::move(id), std::move(slot));
  }
}

std::shared_ptr<ReporterService::Slot> ReporterService::slot(const std::string& session_id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session " + session_id);
  return it->second;
}

void ReporterService::require_open(const ReporterSession& session) {
  if (session.status != SessionStatus::Open) {
    throw Error(ErrorCode::SessionClosed,
                "session " + session.session_id + " is " + std::string(to_string(session.status)));
  }
}

std::string ReporterService::create_session(const std::string& app_id, const std::string& version) {
  store_.app(app_id, version);  // UnknownApp before any id is spent
  auto slot = std::make_shared<Slot>();
  slot->session.session_id = store_.next_session_id();
  slot->session.app_id = app_id;
  slot->session.version = version;
  store_.save_session(slot->session);
  auto id = slot->session.session_id;
  std::unique_lock lock(sessions_mutex_);
  sessions_.emplace(id, std::move(slot));
  return id;
}

ReporterSession ReporterService::session(const std::string& session_id) const {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  return s->session;
}

Suggestion ReporterService::get_suggestions(const std::string& session_id) const {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  auto db = store_.app(s->session.app_id, s->session.version);
  return suggestions_for(s->session, *db);
}

SubmitResult ReporterService::submit_step(const std::string& session_id, const StepInput& input) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  auto& session = s->session;
  require_open(session);
  auto db = store_.app(session.app_id, session.version);

  Step step;
  step.ordinal = static_cast<int>(session.history.size()) + 1;
  step.event = EventToken{input.action, input.component};
  step.input_text = input.input_text;
  step.note = input.note;
  if ((input.action == Action::Type) != input.input_text.has_value()) {
    throw Error(ErrorCode::InvalidStep, input.action == Action::Type ? "type steps need input_text"
                                                                     : "input_text is only allowed on type steps");
  }

  const auto current = suggestions_for(session, *db);
  if (!current.offers(step.event)) {
    if (!input.manual_override) {
      throw Error(ErrorCode::InvalidStep, step.event.to_text() + " is not among the current suggestions");
    }
    const auto* component = db->model.find_component(input.component);
    if (!component) throw Error(ErrorCode::InvalidStep, "unknown component \"" + input.component + "\"");
    if (!component->caps.permits(input.action)) {
      throw Error(ErrorCode::InvalidStep,
                  "component \"" + input.component + "\" does not permit " + std::string(to_string(input.action)));
    }
    step.manual_override = true;
  }

  session.history.push_back(step);
  store_.save_session(session);

  SubmitResult result;
  result.step = step;
  const auto tokens = tokens_of(session.history);
  result.crash = crash_of(tokens, db->efg);
  if (!result.crash) result.suggestion = suggestions_for(session, *db);
  return result;
}

std::optional<Suggestion> ReporterService::undo_last_step(const std::string& session_id) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  auto& session = s->session;
  require_open(session);
  if (session.history.empty()) throw Error(ErrorCode::EmptyHistory, "nothing to undo");
  session.history.pop_back();
  store_.save_session(session);
  auto db = store_.app(session.app_id, session.version);
  return suggestions_for(session, *db);
}

std::string ReporterService::finalize(const std::string& session_id, const std::string& title,
                                      const std::string& device, const std::string& description) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  auto& session = s->session;
  require_open(session);
  if (session.history.empty()) throw Error(ErrorCode::EmptyHistory, "cannot finalize a session without steps");
  auto db = store_.app(session.app_id, session.version);

  ReportMeta meta{store_.next_report_id(), title, device, description, clock_()};
  auto report = assemble_report(meta, session.history, *db);
  store_.save_report(report);
  session.status = SessionStatus::Finalized;
  session.report_id = report.report_id;
  store_.save_session(session);
  return report.report_id;
}

void ReporterService::abandon(const std::string& session_id) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  require_open(s->session);
  s->session.status = SessionStatus::Abandoned;
  store_.save_session(s->session);
}

ReplayResult ReporterService::replay(const std::string& report_id, const std::string& version) {
  const auto report = store_.load_report(report_id);
  auto db = store_.app(report.app_id, version);
  return replay_report(report, db->model);
}

DuplicateResult ReporterService::duplicates_of(const std::string& report_id, const SimilarityConfig& cfg) {
  const auto target = store_.load_report(report_id);
  auto corpus = store_.load_reports();
  std::erase_if(corpus, [&](const BugReport& r) { return r.app_id != target.app_id; });
  auto all = detect_duplicates(corpus, cfg);
  DuplicateResult out;
  for (auto& p : all.pairs) {
    if (p.first == report_id || p.second == report_id) out.pairs.push_back(std::move(p));
  }
  for (auto& c : all.clusters) {
    if (std::find(c.begin(), c.end(), report_id) != c.end()) out.clusters.push_back(std::move(c));
  }
  return out;
}

std::vector<std::pair<std::string, std::uint64_t>> ReporterService::triage(const std::string& report_id) {
  return triage_report(store_.load_report(report_id), store_.owners());
}

}  // namespace guifusion
