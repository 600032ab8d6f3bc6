#include "guifusion/reporting.hpp"

#include <algorithm>
#include <deque>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "guifusion/error.hpp"

namespace guifusion {

namespace {

std::string_view verb_of(Action action) {
  switch (action) {
    case Action::Tap: return "Tap";
    case Action::LongTouch: return "Long-touch";
    case Action::Swipe: return "Swipe";
    case Action::Type: return "Type";
  }
  return "Tap";
}

std::string html_escape(std::string_view text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Keeps free text from opening new markdown headings or breaking list items.
std::string markdown_text(std::string_view text) {
  std::string out;
  bool line_start = true;
  for (char ch : text) {
    if (line_start && ch == '#') out += '\\';
    if (ch == '\n') {
      out += "  \n";
      line_start = true;
      continue;
    }
    out += ch;
    line_start = false;
  }
  return out;
}

Json optional_json(const std::optional<std::string>& value) {
  return value ? Json(*value) : Json(nullptr);
}

std::string screenshot_link(const RenderOptions& options, const std::optional<std::string>& id) {
  if (!id) return "";
  return options.screenshot_base + *id + ".svg";
}

std::string render_markdown(const BugReport& r, const RenderOptions& options) {
  std::ostringstream md;
  md << "# Report Information\n\n";
  md << "- **Title:** " << markdown_text(r.title) << "\n";
  md << "- **Report ID:** " << r.report_id << "\n";
  md << "- **App:** " << r.app_id << " " << r.app_version << "\n";
  md << "- **Device:** " << markdown_text(r.device) << "\n";
  md << "- **Created:** " << r.created_at << "\n";
  if (r.crash) md << "- **Crash:** " << *r.crash << "\n";
  md << "\n" << markdown_text(r.description) << "\n\n";

  md << "# Steps to Reproduce\n\n";
  for (const auto& s : r.steps) {
    md << s.step.ordinal << ". " << markdown_text(s.sentence) << "\n";
    md << "   - Action: " << to_string(s.step.event.action) << "\n";
    md << "   - Component type: " << to_string(s.record.kind) << "\n";
    md << "   - Relative location: " << to_string(s.record.relative_location) << "\n";
    md << "   - Activity: " << s.record.activity << "\n";
    if (s.step.screenshot_crop) {
      md << "   - Component screenshot: ![" << s.record.component_id << "]("
         << screenshot_link(options, s.step.screenshot_crop) << ")\n";
    } else {
      md << "   - Component screenshot: unavailable\n";
    }
    if (s.step.input_text) md << "   - Input text: \"" << markdown_text(*s.step.input_text) << "\"\n";
    if (s.step.note) md << "   - Note: " << markdown_text(*s.step.note) << "\n";
    if (s.step.manual_override) md << "   - Manual entry: yes\n";
  }
  md << "\n# Screenshots\n\n";
  for (const auto& s : r.steps) {
    if (s.step.screenshot_full) {
      md << s.step.ordinal << ". ![Step " << s.step.ordinal << "]("
         << screenshot_link(options, s.step.screenshot_full) << ")\n";
    } else {
      md << s.step.ordinal << ". unavailable\n";
    }
  }
  return md.str();
}

std::string render_html(const BugReport& r, const RenderOptions& options) {
  std::ostringstream h;
  h << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>" << html_escape(r.title)
    << "</title>\n</head>\n<body>\n";
  h << "<section class=\"report-information\">\n<h1>Report Information</h1>\n<dl>\n";
  h << "<dt>Title</dt><dd>" << html_escape(r.title) << "</dd>\n";
  h << "<dt>Report ID</dt><dd>" << html_escape(r.report_id) << "</dd>\n";
  h << "<dt>App</dt><dd>" << html_escape(r.app_id) << " " << html_escape(r.app_version) << "</dd>\n";
  h << "<dt>Device</dt><dd>" << html_escape(r.device) << "</dd>\n";
  h << "<dt>Created</dt><dd>" << html_escape(r.created_at) << "</dd>\n";
  if (r.crash) h << "<dt>Crash</dt><dd>" << html_escape(*r.crash) << "</dd>\n";
  h << "</dl>\n<p class=\"description\">" << html_escape(r.description) << "</p>\n</section>\n";

  h << "<section class=\"steps\">\n<h1>Steps to Reproduce</h1>\n<ol>\n";
  for (const auto& s : r.steps) {
    h << "<li value=\"" << s.step.ordinal << "\">\n<p>" << html_escape(s.sentence) << "</p>\n<dl>\n";
    h << "<dt>Action</dt><dd class=\"action\">" << to_string(s.step.event.action) << "</dd>\n";
    h << "<dt>Component type</dt><dd class=\"component-type\">" << to_string(s.record.kind) << "</dd>\n";
    h << "<dt>Relative location</dt><dd class=\"relative-location\">"
      << to_string(s.record.relative_location) << "</dd>\n";
    h << "<dt>Activity</dt><dd class=\"activity\">" << html_escape(s.record.activity) << "</dd>\n";
    h << "<dt>Component screenshot</dt><dd class=\"component-screenshot\">";
    if (s.step.screenshot_crop) {
      h << "<img src=\"" << html_escape(screenshot_link(options, s.step.screenshot_crop)) << "\" alt=\""
        << html_escape(s.record.component_id) << "\">";
    } else {
      h << "unavailable";
    }
    h << "</dd>\n";
    if (s.step.input_text) h << "<dt>Input text</dt><dd>" << html_escape(*s.step.input_text) << "</dd>\n";
    if (s.step.note) h << "<dt>Note</dt><dd>" << html_escape(*s.step.note) << "</dd>\n";
    if (s.step.manual_override) h << "<dt>Manual entry</dt><dd>yes</dd>\n";
    h << "</dl>\n</li>\n";
  }
  h << "</ol>\n</section>\n";

  h << "<section class=\"screenshots\">\n<h1>Screenshots</h1>\n<ol>\n";
  for (const auto& s : r.steps) {
    h << "<li value=\"" << s.step.ordinal << "\">";
    if (s.step.screenshot_full) {
      h << "<img src=\"" << html_escape(screenshot_link(options, s.step.screenshot_full))
        << "\" alt=\"Step " << s.step.ordinal << "\">";
    } else {
      h << "unavailable";
    }
    h << "</li>\n";
  }
  h << "</ol>\n</section>\n</body>\n</html>\n";
  return h.str();
}

std::string render_json(const BugReport& r, const RenderOptions& options) {
  Json info = Json::object();
  info["report_id"] = r.report_id;
  info["title"] = r.title;
  info["device"] = r.device;
  info["description"] = r.description;
  info["app_id"] = r.app_id;
  info["app_version"] = r.app_version;
  info["created_at"] = r.created_at;
  info["crash"] = optional_json(r.crash);
  Json steps = Json::array();
  Json shots = Json::array();
  for (const auto& s : r.steps) {
    Json js = Json::object();
    js["ordinal"] = s.step.ordinal;
    js["sentence"] = s.sentence;
    js["action"] = to_string(s.step.event.action);
    js["component_id"] = s.record.component_id;
    js["component_label"] = s.record.label;
    js["component_type"] = to_string(s.record.kind);
    js["relative_location"] = to_string(s.record.relative_location);
    js["activity"] = s.record.activity;
    js["component_screenshot"] =
        s.step.screenshot_crop ? Json(screenshot_link(options, s.step.screenshot_crop)) : Json(nullptr);
    js["input_text"] = optional_json(s.step.input_text);
    js["note"] = optional_json(s.step.note);
    js["manual_override"] = s.step.manual_override;
    steps.push_back(std::move(js));
    Json shot = Json::object();
    shot["ordinal"] = s.step.ordinal;
    shot["full_screenshot"] =
        s.step.screenshot_full ? Json(screenshot_link(options, s.step.screenshot_full)) : Json(nullptr);
    shots.push_back(std::move(shot));
  }
  Json doc = Json::object();
  doc["information"] = std::move(info);
  doc["steps"] = std::move(steps);
  doc["screenshots"] = std::move(shots);
  return canonical_dump(doc);
}

// Resolves a recorded component on the current screen of the target app.
std::pair<MatchLevel, const VisibleComponent*> resolve(const ReportStep& s, const GuiState& state,
                                                       const Canvas& canvas) {
  if (const auto* c = state.find(s.step.event.component)) return {MatchLevel::ExactId, c};
  // visible_components is sorted by id, so the first hit is the lowest id.
  if (!s.record.label.empty()) {
    for (const auto& c : state.visible_components) {
      if (c.kind == s.record.kind && c.label == s.record.label) return {MatchLevel::KindLabel, &c};
    }
  }
  for (const auto& c : state.visible_components) {
    if (c.kind == s.record.kind && relative_location(c.bounds, canvas) == s.record.relative_location) {
      return {MatchLevel::KindLocation, &c};
    }
  }
  return {MatchLevel::None, nullptr};
}

// Portable RNG helpers: identical sequences regardless of the standard
// library's distribution implementations.
std::size_t pick_index(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

double pick_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct CrashKey {
  Fingerprint state;
  EventToken event;
  friend bool operator<(const CrashKey& a, const CrashKey& b) {
    if (a.state != b.state) return a.state < b.state;
    return a.event < b.event;
  }
};

std::vector<BugReport> crash_reports(const AppDatabase& db,
                                     const std::vector<std::vector<EventToken>>& paths,
                                     const CrawlOptions& options) {
  std::vector<BugReport> reports;
  int index = 0;
  for (const auto& path : paths) {
    ++index;
    std::ostringstream id;
    id << "crash-" << std::setw(4) << std::setfill('0') << index;
    ReportMeta meta;
    meta.report_id = id.str();
    meta.device = options.device;
    meta.created_at = options.created_at;
    auto report = report_from_path(db, path, meta, options.input_text);
    const auto& last = report.steps.back();
    const std::string exception = report.crash.value_or("unknown exception");
    report.title = "Crash: " + exception + " in " + last.record.activity;
    report.description = "The app throws " + exception + " when the reporter performs " +
                         last.step.event.to_text() + " on screen \"" + last.record.screen + "\" after " +
                         std::to_string(report.steps.size() - 1) + " preceding step(s) from a cold start.";
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<std::vector<EventToken>> shortest_crash_paths(const EventFlowGraph& efg) {
  std::map<Fingerprint, std::vector<EventToken>> path_to;
  std::deque<Fingerprint> queue{efg.cold_start};
  path_to[efg.cold_start] = {};
  std::vector<std::vector<EventToken>> crashes;
  while (!queue.empty()) {
    auto fp = queue.front();
    queue.pop_front();
    for (const auto* edge : efg.outgoing(fp)) {
      if (edge->to.is_crash()) {
        auto path = path_to[fp];
        path.push_back(edge->event);
        crashes.push_back(std::move(path));
        continue;
      }
      if (path_to.count(*edge->to.state)) continue;
      auto path = path_to[fp];
      path.push_back(edge->event);
      path_to.emplace(*edge->to.state, std::move(path));
      queue.push_back(*edge->to.state);
    }
  }
  // BFS dequeues states by distance, so crashes are already ordered by path
  // length; the stable sort only makes that explicit.
  std::stable_sort(crashes.begin(), crashes.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });
  return crashes;
}

std::vector<std::vector<EventToken>> random_crash_paths(const AppDatabase& db, const CrawlStrategy& strategy,
                                                        const CrawlOptions& options) {
  std::mt19937_64 rng(strategy.seed);
  std::set<CrashKey> found;
  std::vector<std::vector<EventToken>> crashes;
  std::uint64_t fired = 0;
  const bool weighted = strategy.kind == CrawlStrategy::Kind::NGramWeighted;

  while (fired < strategy.budget) {
    GuiState state = cold_start(db.model);
    std::vector<EventToken> walk;
    for (std::uint32_t length = 0; length < options.max_walk_length && fired < strategy.budget; ++length) {
      auto candidates = actionable_events(state);
      if (weighted) {
        std::erase_if(candidates, [&](const EventToken& t) { return !db.ngram.contains(t.to_text()); });
      }
      if (candidates.empty()) break;

      std::size_t choice = 0;
      if (weighted) {
        std::vector<double> weights;
        double total = 0.0;
        for (const auto& t : candidates) {
          weights.push_back(ngram_score(db.ngram, walk, t));
          total += weights.back();
        }
        double target = pick_unit(rng) * total;
        choice = candidates.size() - 1;
        for (std::size_t i = 0; i < weights.size(); ++i) {
          if (target < weights[i]) {
            choice = i;
            break;
          }
          target -= weights[i];
        }
      } else {
        choice = pick_index(rng, candidates.size());
      }
      const auto& event = candidates[choice];
      ++fired;
      auto result = execute_event(db.model, state, event,
                                  event.action == Action::Type ? std::optional(options.input_text)
                                                               : std::nullopt);
      if (std::holds_alternative<NoOp>(result)) continue;
      if (std::holds_alternative<CrashOutcome>(result)) {
        if (found.insert(CrashKey{state.fingerprint, event}).second) {
          walk.push_back(event);
          crashes.push_back(walk);
        }
        break;
      }
      walk.push_back(event);
      state = std::get<GuiState>(std::move(result));
    }
  }
  return crashes;
}

}  // namespace

std::vector<EventToken> BugReport::tokens() const {
  std::vector<EventToken> out;
  for (const auto& s : steps) out.push_back(s.step.event);
  return out;
}

Json to_json(const BugReport& r) {
  Json j = Json::object();
  j["report_id"] = r.report_id;
  j["title"] = r.title;
  j["device"] = r.device;
  j["description"] = r.description;
  j["app_id"] = r.app_id;
  j["app_version"] = r.app_version;
  j["created_at"] = r.created_at;
  j["crash"] = optional_json(r.crash);
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    Json js = to_json(s.step);
    js["record"] = to_json(s.record);
    js["sentence"] = s.sentence;
    steps.push_back(std::move(js));
  }
  j["steps"] = std::move(steps);
  return j;
}

BugReport bug_report_from_json(const Json& j) {
  BugReport r;
  r.report_id = j.at("report_id").get<std::string>();
  r.title = j.at("title").get<std::string>();
  r.device = j.at("device").get<std::string>();
  r.description = j.at("description").get<std::string>();
  r.app_id = j.at("app_id").get<std::string>();
  r.app_version = j.at("app_version").get<std::string>();
  r.created_at = j.at("created_at").get<std::string>();
  if (!j.at("crash").is_null()) r.crash = j.at("crash").get<std::string>();
  for (const auto& js : j.at("steps")) {
    ReportStep s;
    s.step = step_from_json(js);
    s.record = component_record_from_json(js.at("record"));
    s.sentence = js.at("sentence").get<std::string>();
    r.steps.push_back(std::move(s));
  }
  return r;
}

BugReport assemble_report(const ReportMeta& meta, std::vector<Step> steps, const AppDatabase& db) {
  if (steps.empty()) throw Error(ErrorCode::EmptySteps, "a report needs at least one step");
  const auto& model = db.model;

  BugReport report;
  report.report_id = meta.report_id;
  report.title = meta.title;
  report.device = meta.device;
  report.description = meta.description;
  report.app_id = model.app_id;
  report.app_version = model.version;
  report.created_at = meta.created_at;

  std::optional<GuiState> current = cold_start(model);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    Step step = std::move(steps[i]);
    step.ordinal = static_cast<int>(i + 1);
    check_step_input(step);
    const auto* record = db.record(step.event.component);
    if (!record) {
      throw Error(ErrorCode::UnresolvedComponent, "step " + std::to_string(step.ordinal) + " names component \"" +
                                                      step.event.component + "\" which is not in the app");
    }
    GuiState before = (current && current->find(step.event.component))
                          ? *current
                          : make_state(model, *model.find_screen(record->screen));
    auto result = execute_event(model, before, step.event, step.input_text);
    step.state_before = before.fingerprint;
    step.screenshot_full = content_digest(render_screenshot(before, step.event.component));
    step.screenshot_crop = content_digest(crop_screenshot(before, step.event.component));
    if (std::holds_alternative<NoOp>(result)) {
      step.state_after = EdgeTarget{before.fingerprint, std::nullopt};
      current = std::move(before);
    } else if (const auto* crash = std::get_if<CrashOutcome>(&result)) {
      step.state_after = EdgeTarget{std::nullopt, crash->exception};
      current.reset();
    } else {
      auto& next = std::get<GuiState>(result);
      step.state_after = EdgeTarget{next.fingerprint, std::nullopt};
      current = std::move(next);
    }
    ReportStep rs{std::move(step), *record, ""};
    rs.sentence = generate_step_sentence(rs.step, rs.record);
    report.steps.push_back(std::move(rs));
  }
  const auto& last = report.steps.back().step.state_after;
  if (last && last->is_crash()) report.crash = last->crash;
  return report;
}

std::map<std::string, std::string> report_screenshots(const BugReport& report, const AppModel& model) {
  std::map<std::string, std::string> out;
  for (const auto& s : report.steps) {
    const auto* screen = model.screen_of(s.step.event.component);
    if (!screen) continue;
    auto state = make_state(model, *screen);
    auto full = render_screenshot(state, s.step.event.component);
    auto crop = crop_screenshot(state, s.step.event.component);
    out.emplace(content_digest(full), std::move(full));
    out.emplace(content_digest(crop), std::move(crop));
  }
  return out;
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "md" || text == "markdown") return ReportFormat::Markdown;
  if (text == "html") return ReportFormat::Html;
  if (text == "json") return ReportFormat::Json;
  return std::nullopt;
}

std::string_view file_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Markdown: return "md";
    case ReportFormat::Html: return "html";
    case ReportFormat::Json: return "json";
  }
  return "md";
}

std::string render_report(const BugReport& report, ReportFormat format, const RenderOptions& options) {
  switch (format) {
    case ReportFormat::Markdown: return render_markdown(report, options);
    case ReportFormat::Html: return render_html(report, options);
    case ReportFormat::Json: return render_json(report, options);
  }
  return {};
}

std::string generate_step_sentence(const Step& step, const ComponentRecord& record) {
  std::string sentence(verb_of(step.event.action));
  sentence += " the ";
  if (!record.label.empty()) sentence += "\"" + record.label + "\" ";
  sentence += to_string(record.kind);
  sentence += " located on the ";
  sentence += to_string(record.relative_location);
  sentence += " of the screen";
  if (step.event.action == Action::Type && step.input_text) {
    sentence += " entering \"" + *step.input_text + "\"";
  }
  sentence += ".";
  return sentence;
}

std::string_view to_string(MatchLevel level) {
  switch (level) {
    case MatchLevel::ExactId: return "exact-id";
    case MatchLevel::KindLabel: return "kind+label";
    case MatchLevel::KindLocation: return "kind+location";
    case MatchLevel::None: return "none";
  }
  return "none";
}

std::string_view to_string(ReplayOutcome outcome) {
  switch (outcome) {
    case ReplayOutcome::Reproduced: return "reproduced";
    case ReplayOutcome::Diverged: return "diverged";
    case ReplayOutcome::CrashReproduced: return "crash-reproduced";
  }
  return "diverged";
}

Json to_json(const ReplayResult& result) {
  Json j = Json::object();
  j["outcome"] = to_string(result.outcome);
  Json steps = Json::array();
  for (const auto& s : result.steps) {
    Json js = Json::object();
    js["ordinal"] = s.ordinal;
    js["match_level"] = to_string(s.match_level);
    js["resolved_component"] = optional_json(s.resolved_component);
    js["result"] = s.result ? Json(s.result->to_text()) : Json(nullptr);
    steps.push_back(std::move(js));
  }
  j["steps"] = std::move(steps);
  j["divergence_ordinal"] = result.divergence_ordinal ? Json(*result.divergence_ordinal) : Json(nullptr);
  return j;
}

ReplayResult replay_report(const BugReport& report, const AppModel& target_model) {
  ReplayResult result;
  auto diverge = [&result](int ordinal) {
    result.outcome = ReplayOutcome::Diverged;
    result.divergence_ordinal = ordinal;
    return result;
  };

  GuiState state = cold_start(target_model);
  for (std::size_t i = 0; i < report.steps.size(); ++i) {
    const auto& s = report.steps[i];
    const bool final_step = i + 1 == report.steps.size();
    ReplayStepRecord record;
    record.ordinal = s.step.ordinal;
    auto [level, component] = resolve(s, state, target_model.canvas);
    record.match_level = level;
    if (!component) {
      result.steps.push_back(std::move(record));
      return diverge(s.step.ordinal);
    }
    record.resolved_component = component->id;
    auto outcome = execute_event(target_model, state, EventToken{s.step.event.action, component->id},
                                 s.step.input_text);
    if (std::holds_alternative<NoOp>(outcome)) {
      result.steps.push_back(std::move(record));
      return diverge(s.step.ordinal);
    }
    if (const auto* crash = std::get_if<CrashOutcome>(&outcome)) {
      record.result = EdgeTarget{std::nullopt, crash->exception};
      result.steps.push_back(std::move(record));
      if (final_step && report.crash) {
        result.outcome = ReplayOutcome::CrashReproduced;
        return result;
      }
      return diverge(s.step.ordinal);
    }
    state = std::get<GuiState>(std::move(outcome));
    record.result = EdgeTarget{state.fingerprint, std::nullopt};
    result.steps.push_back(std::move(record));
    if (final_step && report.crash) return diverge(s.step.ordinal);  // expected crash did not occur
  }
  result.outcome = ReplayOutcome::Reproduced;
  return result;
}

BugReport report_from_path(const AppDatabase& db, const std::vector<EventToken>& path, const ReportMeta& meta,
                           const std::string& input_text) {
  std::vector<Step> steps;
  for (const auto& event : path) {
    Step s;
    s.event = event;
    if (event.action == Action::Type) s.input_text = input_text;
    steps.push_back(std::move(s));
  }
  return assemble_report(meta, std::move(steps), db);
}

std::vector<BugReport> crawl_for_crashes(const AppDatabase& db, const CrawlStrategy& strategy,
                                         const CrawlOptions& options) {
  if (strategy.kind == CrawlStrategy::Kind::DfsComplete) {
    RipConfig unbounded;
    unbounded.max_events = std::numeric_limits<std::uint64_t>::max();
    unbounded.max_depth = std::numeric_limits<std::uint32_t>::max();
    const auto full = rip(db.model, unbounded);
    return crash_reports(db, shortest_crash_paths(full.graph), options);
  }
  if (strategy.budget == 0) throw Error(ErrorCode::InvalidArgument, "crawl budget must be positive");
  return crash_reports(db, random_crash_paths(db, strategy, options), options);
}

}  // namespace guifusion
