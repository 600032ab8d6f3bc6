#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "guifusion/flow.hpp"

namespace guifusion {

/// Everything the analysis phase produces for one (app, version): the model,
/// its component universe, the ripped event-flow graph, the exploration
/// trace, and the n-gram model trained on that trace.
struct AppDatabase {
  AppModel model;
  std::vector<ComponentRecord> universe;
  EventFlowGraph efg;
  EventTrace trace;
  NGramModel ngram;
  std::map<std::string, std::string> svgs;  // only populated by build_database

  const ComponentRecord* record(std::string_view component_id) const;
};

struct AnalysisConfig {
  RipConfig rip;
  int ngram_order = 3;
  double ngram_alpha = 1.0;
};

AppDatabase build_database(const AppModel& model, const AnalysisConfig& config = {});

/// <root>/db/<app_id>/<version>
std::filesystem::path database_dir(const std::filesystem::path& root, std::string_view app_id,
                                   std::string_view version);

/// Writes model.json, efg.json, ngram.json, trace.json, states/*.json and
/// screens/*.svg. Returns the directory written.
std::filesystem::path write_database(const std::filesystem::path& root, const AppDatabase& db);

AppDatabase load_database(const std::filesystem::path& dir);

Json trace_to_json(const EventTrace& trace);
EventTrace trace_from_json(const Json& json);

}  // namespace guifusion
