#include "guifusion/database.hpp"

#include "guifusion/error.hpp"

namespace guifusion {

const ComponentRecord* AppDatabase::record(std::string_view component_id) const {
  for (const auto& r : universe) {
    if (r.component_id == component_id) return &r;
  }
  return nullptr;
}

AppDatabase build_database(const AppModel& model, const AnalysisConfig& config) {
  AppDatabase db;
  db.model = model;
  db.universe = extract_component_universe(model);
  auto out = rip(model, config.rip);
  db.efg = std::move(out.graph);
  db.trace = std::move(out.trace);
  db.svgs = std::move(out.svgs);
  const auto vocabulary = db.efg.edge_tokens();
  db.ngram = train_ngram(db.trace, config.ngram_order, config.ngram_alpha, vocabulary);
  return db;
}

std::filesystem::path database_dir(const std::filesystem::path& root, std::string_view app_id,
                                   std::string_view version) {
  return root / "db" / std::string(app_id) / std::string(version);
}

std::filesystem::path write_database(const std::filesystem::path& root, const AppDatabase& db) {
  const auto dir = database_dir(root, db.model.app_id, db.model.version);
  // Stale states/screens from an earlier rip must not survive a re-rip.
  std::filesystem::remove_all(dir);
  write_file(dir / "model.json", serialize_app_model(db.model));
  write_file(dir / "efg.json", canonical_dump(to_json(db.efg)));
  write_file(dir / "ngram.json", canonical_dump(to_json(db.ngram)));
  write_file(dir / "trace.json", canonical_dump(trace_to_json(db.trace)));
  for (const auto& [fp, state] : db.efg.states) {
    write_file(dir / "states" / (fp + ".json"), canonical_dump(to_json(state)));
  }
  for (const auto& [id, svg] : db.svgs) write_file(dir / "screens" / (id + ".svg"), svg);
  return dir;
}

AppDatabase load_database(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::UnknownApp, "no ripped database at " + dir.string());
  }
  AppDatabase db;
  db.model = load_app_model(dir / "model.json");
  db.universe = extract_component_universe(db.model);
  const auto efg_json = read_json_file(dir / "efg.json");
  std::map<Fingerprint, GuiState> states;
  for (const auto& fp : efg_json.at("states")) {
    auto key = fp.get<std::string>();
    states.emplace(key, gui_state_from_json(read_json_file(dir / "states" / (key + ".json"))));
  }
  db.efg = event_flow_graph_from_json(efg_json, std::move(states));
  db.trace = trace_from_json(read_json_file(dir / "trace.json"));
  db.ngram = ngram_from_json(read_json_file(dir / "ngram.json"));
  return db;
}

Json trace_to_json(const EventTrace& trace) {
  Json episodes = Json::array();
  for (const auto& episode : trace) {
    Json e = Json::array();
    for (const auto& t : episode) e.push_back(t.to_text());
    episodes.push_back(std::move(e));
  }
  Json j = Json::object();
  j["episodes"] = std::move(episodes);
  return j;
}

EventTrace trace_from_json(const Json& j) {
  EventTrace trace;
  for (const auto& e : j.at("episodes")) {
    auto& episode = trace.emplace_back();
    for (const auto& t : e) episode.push_back(EventToken::parse(t.get<std::string>()));
  }
  return trace;
}

}  // namespace guifusion
