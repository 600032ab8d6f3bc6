// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "guifusion/service.hpp"
#include "support/oracles.hpp"
#include "support/store_fixture.hpp"

using namespace guifusion;
using guifusion::testing::fixed_clock;
using guifusion::testing::fixture;
using guifusion::testing::fixture_db;
using guifusion::testing::NoteStore;
using guifusion::testing::snapshot;
using guifusion::testing::TempDir;
using guifusion::testing::tok;

namespace {

using Clock = std::chrono::steady_clock;

struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<EventToken> toks(const std::vector<std::string>& texts) {
  std::vector<EventToken> out;
  for (const auto& t : texts) out.push_back(tok(t));
  return out;
}

std::vector<Step> steps_of(const std::vector<EventToken>& tokens) {
  std::vector<Step> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    Step s;
    s.ordinal = static_cast<int>(i + 1);
    s.event = tokens[i];
    if (s.event.action == Action::Type) s.input_text = "test";
    out.push_back(std::move(s));
  }
  return out;
}

BugReport path_report(const AppDatabase& db, const std::vector<EventToken>& path, const std::string& id) {
  return report_from_path(db, path, ReportMeta{id, "Acceptance", "emulator", "generated", "2026-01-01T00:00:00Z"});
}

// Every path of 1..max_len edges in a ripped graph, starting at cold start.
std::vector<std::vector<EventToken>> efg_paths(const EventFlowGraph& g, std::size_t max_len) {
  std::vector<std::vector<EventToken>> out;
  std::function<void(const Fingerprint&, std::vector<EventToken>&)> extend = [&](const Fingerprint& at,
                                                                                  std::vector<EventToken>& path) {
    if (path.size() == max_len) return;
    for (const auto* e : g.outgoing(at)) {
      path.push_back(e->event);
      out.push_back(path);
      if (!e->to.is_crash()) extend(*e->to.state, path);
      path.pop_back();
    }
  };
  std::vector<EventToken> path;
  extend(g.cold_start, path);
  return out;
}

std::vector<std::string> texts_of(const std::vector<EventToken>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.to_text());
  return out;
}

// ---------------------------------------------------------------------------

void ripper_oracle_equivalence() {
  for (const auto* name : {"noteapp-v1", "gallery-v1", "settings-v1"}) {
    const auto model = fixture(name);
    const auto start = Clock::now();
    const auto out = rip(model, RipConfig{std::numeric_limits<std::uint64_t>::max(),
                                          std::numeric_limits<std::uint32_t>::max(), {"", "test"}, 0});
    const double elapsed = seconds_since(start);
    const auto reach = oracle::bfs(model);

    std::set<Fingerprint> oracle_states;
    for (const auto& screen : reach.screens) oracle_states.insert(make_state(model, *model.find_screen(screen)).fingerprint);
    std::set<Fingerprint> ripped_states;
    for (const auto& [fp, _] : out.graph.states) ripped_states.insert(fp);
    require(ripped_states == oracle_states, std::string(name) + ": state sets differ");

    std::set<oracle::Edge> ripped_edges;
    for (const auto& e : out.graph.edges) {
      const auto to = e.to.is_crash() ? "CRASH:" + *e.to.crash : out.graph.state(*e.to.state).screen;
      ripped_edges.insert({out.graph.state(e.from).screen, e.event.to_text(), to});
    }
    require(ripped_edges == reach.edges && out.graph.edges.size() == reach.edges.size(),
            std::string(name) + ": edge sets differ");
    require(!out.graph.truncated, std::string(name) + ": truncated");
    require(elapsed < 1.0, std::string(name) + ": rip took " + std::to_string(elapsed) + " s");
  }
}

void round_trip_reproduction() {
  const auto& db = fixture_db("noteapp-v1");
  const auto start = Clock::now();
  const auto paths = efg_paths(db.efg, 5);
  require(paths.size() == oracle::paths_up_to(db.model, 5).size(), "path enumeration disagrees with oracle");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto r = path_report(db, paths[i], "rt-" + std::to_string(i));
    const auto result = replay_report(r, db.model);
    const auto expected = r.crash ? ReplayOutcome::CrashReproduced : ReplayOutcome::Reproduced;
    if (result.outcome == expected) ++ok;
  }
  const double elapsed = seconds_since(start);
  require(ok == paths.size(), std::to_string(ok) + "/" + std::to_string(paths.size()) + " reproduced");
  require(elapsed < 5.0, "took " + std::to_string(elapsed) + " s");
}

void suggestion_soundness_completeness() {
  const auto& db = fixture_db("noteapp-v1");
  const auto start = Clock::now();
  std::size_t checked = 0;
  for (std::size_t len = 0; len <= 4; ++len) {
    for (const auto& h : oracle::histories(db.model, len)) {
      const auto screen = oracle::walk(db.model, h);
      const auto suggestion = suggest_next(steps_of(toks(h)), db.efg, db.ngram, db.universe);
      std::set<std::string> offered;
      for (const auto& group : suggestion.components_by_action) {
        for (const auto& c : group.components) offered.insert(std::string(to_string(group.action)) + "@" + c.record.component_id);
      }
      require(offered == oracle::outgoing_tokens(db.model, *screen), "mismatch after history of length " + std::to_string(len));
      ++checked;
    }
  }
  const double elapsed = seconds_since(start);
  require(checked > 0, "no histories enumerated");
  require(elapsed < 5.0, "took " + std::to_string(elapsed) + " s");
}

void ngram_correctness() {
  const auto& db = fixture_db("noteapp-v1");
  const auto worked_trace = toks({"tap@btn_new", "type@txt_title", "tap@btn_save"});
  const auto bigram = train_ngram(std::span<const EventToken>(worked_trace), 2, 1.0, db.efg.edge_tokens());
  require(bigram.vocabulary.size() == 7, "|V| = " + std::to_string(bigram.vocabulary.size()));
  const auto history = toks({"tap@btn_new"});
  require(ngram_score(bigram, history, tok("type@txt_title")) == 0.25, "worked bigram value is not exactly 0.25");

  for (const auto* model : {&bigram, &db.ngram}) {
    for (const auto& [ctx, _] : model->counts) {
      std::vector<EventToken> h;
      for (const auto& t : ctx) {
        if (t != kStartToken) h.push_back(tok(t));
      }
      double sum = 0.0;
      for (const auto& v : model->vocabulary) sum += ngram_score(*model, h, tok(v));
      require(std::abs(sum - 1.0) <= 1e-9, "context sums to " + std::to_string(sum));
    }
  }
}

void crash_crawling() {
  const auto& db = fixture_db("noteapp-v1");
  const auto reports = crawl_for_crashes(db, CrawlStrategy::dfs_complete());
  require(reports.size() == 1, std::to_string(reports.size()) + " crash reports");
  const auto oracle_lengths = oracle::shortest_crash_lengths(db.model);
  require(oracle_lengths.size() == 1, "oracle sees " + std::to_string(oracle_lengths.size()) + " crashes");
  const auto path = texts_of(reports[0].tokens());
  require(path.size() == 2 && path.size() == oracle_lengths.begin()->second, "path length " + std::to_string(path.size()));
  require(oracle::walk(db.model, path) == std::optional<std::string>("CRASH:NullPointerException"),
          "reported path does not reach the crash");

  for (const auto& strategy : {CrawlStrategy::uniform_random(7, 500), CrawlStrategy::ngram_weighted(7, 500),
                               CrawlStrategy::uniform_random(42, 50), CrawlStrategy::ngram_weighted(42, 50)}) {
    const auto a = crawl_for_crashes(db, strategy);
    const auto b = crawl_for_crashes(db, strategy);
    require(a == b, "seeded strategy differs between runs");
  }
}

void adaptive_replay() {
  const auto& db = fixture_db("noteapp-v1");
  const auto report = path_report(db, toks({"tap@btn_new", "type@txt_title", "tap@btn_back"}), "adaptive");
  const auto v2 = replay_report(report, fixture("noteapp-v2"));
  require(v2.outcome == ReplayOutcome::Reproduced, "v2 outcome " + std::string(to_string(v2.outcome)));
  require(v2.steps.size() == 3 && v2.steps[2].match_level == MatchLevel::KindLabel, "tap@btn_back not matched by kind+label");
  const auto broken = replay_report(report, fixture("noteapp-v2-broken"));
  require(broken.outcome == ReplayOutcome::Diverged, "broken variant did not diverge");
  require(broken.divergence_ordinal == std::optional<int>(3), "diverged at the wrong ordinal");
}

void dedup_properties() {
  const auto& db = fixture_db("noteapp-v1");
  const auto a = path_report(db, toks({"tap@btn_new", "type@txt_title", "tap@btn_save"}), "a");
  const auto b = path_report(db, toks({"tap@btn_new", "tap@btn_save"}), "b");
  require(std::abs(report_similarity(a, b) - 0.4) <= 1e-9, "worked pair scored " + std::to_string(report_similarity(a, b)));
  require(detect_duplicates({a, b}, SimilarityConfig{0.5, 0.5, 0.8}).pairs.empty(), "tau 0.8 flags the pair");
  require(detect_duplicates({a, b}, SimilarityConfig{0.5, 0.5, 0.3}).pairs.size() == 1, "tau 0.3 misses the pair");

  std::vector<BugReport> corpus;
  for (const auto& p : efg_paths(db.efg, 3)) corpus.push_back(path_report(db, p, "c" + std::to_string(corpus.size())));
  for (const auto& x : corpus) {
    require(report_similarity(x, x) == 1.0, "self-similarity is not 1");
    for (const auto& y : corpus) require(report_similarity(x, y) == report_similarity(y, x), "asymmetric pair");
  }
}

void determinism() {
  const auto model = fixture("settings-v1");
  TempDir first, second;
  write_database(first.path(), build_database(model));
  write_database(second.path(), build_database(model));
  require(snapshot(first.path()) == snapshot(second.path()), "database directories differ");
  require(!snapshot(first.path()).empty(), "nothing written");

  const auto& db = fixture_db("noteapp-v1");
  const auto report = path_report(db, toks({"tap@btn_list", "tap@item_note", "type@txt_title", "tap@btn_save"}), "d");
  for (auto f : {ReportFormat::Markdown, ReportFormat::Html, ReportFormat::Json}) {
    require(render_report(report, f) == render_report(report, f), "render differs");
  }
}

std::size_t count_prefix_lines(const std::string& doc, const std::string& prefix) {
  std::size_t n = 0;
  std::istringstream in(doc);
  for (std::string line; std::getline(in, line);) n += line.rfind(prefix, 0) == 0;
  return n;
}

std::size_t count_of(const std::string& doc, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = doc.find(needle); pos != std::string::npos; pos = doc.find(needle, pos + 1)) ++n;
  return n;
}

void report_structure() {
  std::vector<BugReport> reports;
  for (const auto* name : {"noteapp-v1", "gallery-v1", "settings-v1"}) {
    const auto& db = fixture_db(name);
    for (const auto& p : efg_paths(db.efg, 3)) reports.push_back(path_report(db, p, "s"));
    for (auto& r : crawl_for_crashes(db, CrawlStrategy::dfs_complete())) reports.push_back(std::move(r));
  }
  for (const auto& r : reports) {
    const auto n = r.steps.size();
    const auto md = render_report(r, ReportFormat::Markdown);
    require(count_prefix_lines(md, "# ") == 3, "markdown section count");
    for (const auto* field : {"   - Action: ", "   - Component type: ", "   - Relative location: ", "   - Activity: ",
                              "   - Component screenshot: !["}) {
      require(count_prefix_lines(md, field) == n, std::string("markdown field ") + field);
    }
    const auto html = render_report(r, ReportFormat::Html);
    require(count_of(html, "<section") == 3, "html section count");
    for (const auto* cls : {"\"action\"", "\"component-type\"", "\"relative-location\"", "\"activity\"",
                            "\"component-screenshot\""}) {
      require(count_of(html, std::string("<dd class=") + cls) == n, std::string("html field ") + cls);
    }
    const auto json = Json::parse(render_report(r, ReportFormat::Json));
    require(json.size() == 3 && json.contains("information") && json.contains("steps") && json.contains("screenshots"),
            "json sections");
    require(json["screenshots"].size() == n, "json screenshots");
    for (const auto& s : json["steps"]) {
      for (const auto* key : {"action", "component_type", "relative_location", "activity", "component_screenshot"}) {
        require(s.contains(key) && s[key].is_string() && !s[key].get<std::string>().empty(), std::string("json field ") + key);
      }
    }
  }
}

void service_fidelity() {
  NoteStore files;
  std::map<std::string, std::string> before;
  std::string report_id;
  {
    Store store(files.root());
    ReporterService service(store, fixed_clock);
    HttpService http(service);
    const int port = http.bind("127.0.0.1", 0);
    std::thread server([&] { http.listen(); });
    httplib::Client client("127.0.0.1", port);
    auto call = [&](const std::string& method, const std::string& path, const Json& body = Json()) {
      httplib::Result res = method == "GET" ? client.Get(path.c_str())
                                            : client.Post(path.c_str(), body.dump(), "application/json");
      if (!res) throw Failure{method + " " + path + " failed"};
      return Json::parse(res->body);
    };
    try {
      const auto& db = fixture_db("noteapp-v1");
      const std::string session = call("POST", "/api/sessions", Json{{"app_id", "noteapp"}, {"version", "1"}})["session_id"];
      std::vector<EventToken> history;
      for (const auto* t : {"tap@btn_new", "type@txt_title", "tap@btn_back"}) {
        require(call("GET", "/api/sessions/" + session + "/suggestions") ==
                    to_json(suggest_next(steps_of(history), db.efg, db.ngram, db.universe)),
                "suggestion payload differs from suggest_next");
        const auto token = tok(t);
        Json body{{"action", to_string(token.action)}, {"component", token.component}};
        if (token.action == Action::Type) body["input_text"] = "test";
        call("POST", "/api/sessions/" + session + "/steps", body);
        history.push_back(token);
      }
      report_id = call("POST", "/api/sessions/" + session + "/finalize",
                       Json{{"title", "Back"}, {"device", "emulator"}, {"description", "x"}})["report_id"];
      const std::string other = call("POST", "/api/sessions", Json{{"app_id", "noteapp"}, {"version", "1"}})["session_id"];
      for (const auto* t : {"tap@btn_new", "tap@btn_save"}) {
        const auto token = tok(t);
        call("POST", "/api/sessions/" + other + "/steps", Json{{"action", "tap"}, {"component", token.component}});
      }
      const std::string other_report = call("POST", "/api/sessions/" + other + "/finalize",
                                            Json{{"title", "Save"}, {"device", "emulator"}, {"description", "y"}})["report_id"];
      call("POST", "/api/sessions", Json{{"app_id", "noteapp"}, {"version", "2"}});

      const auto report = store.load_report(report_id);
      for (const auto* version : {"1", "2", "2b"}) {
        const auto target = store.app("noteapp", version);
        require(call("POST", "/api/reports/" + report_id + "/replay", Json{{"version", version}}) ==
                    to_json(replay_report(report, target->model)),
                std::string("replay payload differs for version ") + version);
      }
      const auto corpus = store.load_reports();
      for (double tau : {0.3, 0.8}) {
        auto all = detect_duplicates(corpus, SimilarityConfig{0.5, 0.5, tau});
        DuplicateResult expected;
        for (const auto& p : all.pairs) {
          if (p.first == report_id || p.second == report_id) expected.pairs.push_back(p);
        }
        for (const auto& c : all.clusters) {
          if (std::find(c.begin(), c.end(), report_id) != c.end()) expected.clusters.push_back(c);
        }
        std::ostringstream path;
        path << "/api/reports/" << report_id << "/duplicates?tau=" << tau;
        require(call("GET", path.str()) == to_json(expected), "dedup payload differs");
      }
      write_file(files.root() / "owners.json", R"({"alice": {"EditorActivity": 5, "MainActivity": 1}, "bob": {"ListActivity": 3}})");
      for (const auto& id : {report_id, other_report}) {
        require(call("GET", "/api/reports/" + id + "/triage") ==
                    to_json(triage_report(store.load_report(id), ownership_from_json(read_json_file(files.root() / "owners.json")))),
                "triage payload differs");
      }
    } catch (...) {
      http.stop();
      server.join();
      throw;
    }
    http.stop();
    server.join();
    before = snapshot(files.root());
  }

  // Restart over the same directory and write everything back.
  Store store(files.root());
  ReporterService service(store, fixed_clock);
  for (const auto& s : store.load_sessions()) {
    require(service.session(s.session_id) == s, "session changed across restart");
    store.save_session(service.session(s.session_id));
  }
  for (const auto& r : store.load_reports()) store.save_report(r);
  require(snapshot(files.root()) == before, "store bytes changed across restart");
  require(store.load_sessions().size() == 3 && store.load_reports().size() == 2, "sessions or reports lost");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"ripper oracle equivalence", ripper_oracle_equivalence},
      {"round-trip reproduction", round_trip_reproduction},
      {"suggestion soundness/completeness", suggestion_soundness_completeness},
      {"n-gram correctness", ngram_correctness},
      {"crash crawling", crash_crawling},
      {"adaptive replay", adaptive_replay},
      {"dedup properties", dedup_properties},
      {"determinism", determinism},
      {"report structure", report_structure},
      {"service fidelity", service_fidelity},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = Clock::now();
    std::string problem;
    try {
      check();
    } catch (const Failure& f) {
      problem = f.what;
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3fs", seconds_since(start));
    if (problem.empty()) {
      std::cout << "PASS  " << name << " (" << timing << ")\n";
    } else {
      ++failed;
      std::cout << "FAIL  " << name << " (" << timing << "): " << problem << "\n";
    }
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
