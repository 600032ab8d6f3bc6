#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "guifusion/database.hpp"

namespace guifusion {

/// A step as it appears in a finished report: the reporter's tuple plus the
/// five developer-facing fields (action, component type, relative location,
/// activity, component screenshot) and a generated sentence.
struct ReportStep {
  Step step;
  ComponentRecord record;
  std::string sentence;

  friend bool operator==(const ReportStep&, const ReportStep&) = default;
};

struct BugReport {
  std::string report_id;
  std::string title;
  std::string device;
  std::string description;
  std::string app_id;
  std::string app_version;
  std::vector<ReportStep> steps;
  std::string created_at;
  std::optional<std::string> crash;  // exception raised by the final step

  std::vector<EventToken> tokens() const;

  friend bool operator==(const BugReport&, const BugReport&) = default;
};

Json to_json(const BugReport& report);
BugReport bug_report_from_json(const Json& json);

struct ReportMeta {
  std::string report_id;
  std::string title;
  std::string device;
  std::string description;
  std::string created_at;
};

/// Enriches each step with its component record, the states it was
/// executed against, and screenshot ids. Steps that fall off the ripped
/// graph are resolved against the model's screen for the component.
/// Throws Error(EmptySteps) or Error(UnresolvedComponent).
BugReport assemble_report(const ReportMeta& meta, std::vector<Step> steps, const AppDatabase& db);

/// Screenshot documents referenced by `report`, re-rendered from the model.
std::map<std::string, std::string> report_screenshots(const BugReport& report, const AppModel& model);

enum class ReportFormat { Markdown, Html, Json };

std::optional<ReportFormat> parse_report_format(std::string_view text);
std::string_view file_extension(ReportFormat format);

struct RenderOptions {
  /// Prefix for screenshot links; the id and ".svg" are appended.
  std::string screenshot_base = "screens/";
};

std::string render_report(const BugReport& report, ReportFormat format, const RenderOptions& options = {});

std::string generate_step_sentence(const Step& step, const ComponentRecord& record);

enum class MatchLevel { ExactId, KindLabel, KindLocation, None };
std::string_view to_string(MatchLevel level);

enum class ReplayOutcome { Reproduced, Diverged, CrashReproduced };
std::string_view to_string(ReplayOutcome outcome);

struct ReplayStepRecord {
  int ordinal = 0;
  MatchLevel match_level = MatchLevel::None;
  std::optional<ComponentId> resolved_component;
  std::optional<EdgeTarget> result;  // unset when nothing was executed or NoOp

  friend bool operator==(const ReplayStepRecord&, const ReplayStepRecord&) = default;
};

struct ReplayResult {
  ReplayOutcome outcome = ReplayOutcome::Reproduced;
  std::vector<ReplayStepRecord> steps;
  std::optional<int> divergence_ordinal;

  friend bool operator==(const ReplayResult&, const ReplayResult&) = default;
};

Json to_json(const ReplayResult& result);

ReplayResult replay_report(const BugReport& report, const AppModel& target_model);

struct CrawlStrategy {
  enum class Kind { DfsComplete, UniformRandom, NGramWeighted };
  Kind kind = Kind::DfsComplete;
  std::uint64_t seed = 0;
  std::uint64_t budget = 0;  // events; ignored by DfsComplete

  static CrawlStrategy dfs_complete() { return {}; }
  static CrawlStrategy uniform_random(std::uint64_t seed, std::uint64_t budget) {
    return {Kind::UniformRandom, seed, budget};
  }
  static CrawlStrategy ngram_weighted(std::uint64_t seed, std::uint64_t budget) {
    return {Kind::NGramWeighted, seed, budget};
  }
};

struct CrawlOptions {
  std::string created_at = "1970-01-01T00:00:00Z";
  std::string device = "model-interpreter";
  std::string input_text = "test";
  std::uint32_t max_walk_length = 50;
};

/// One finalized report per distinct crash edge reached. Report ids are
/// "crash-0001", "crash-0002", ... in discovery order (shortest first for
/// dfs-complete).
std::vector<BugReport> crawl_for_crashes(const AppDatabase& db, const CrawlStrategy& strategy,
                                         const CrawlOptions& options = {});

/// Builds a finalized report from an EFG path (used by crawlers and tests).
BugReport report_from_path(const AppDatabase& db, const std::vector<EventToken>& path,
                           const ReportMeta& meta, const std::string& input_text = "test");

}  // namespace guifusion
