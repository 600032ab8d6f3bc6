#include "guifusion/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "guifusion/error.hpp"
#include "guifusion/service.hpp"

namespace fs = std::filesystem;

namespace guifusion {

namespace {

HttpService* g_running_server = nullptr;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void handle_signal(int) {
  if (g_running_server) g_running_server->stop();
}

fs::path resolve_db(const std::string& flag) {
  if (const char* env = std::getenv("GUIFUSION_DB"); env && *env) return env;
  if (flag.empty()) throw UsageError("no store given (use --db or GUIFUSION_DB)");
  return flag;
}

BugReport load_report_arg(const std::string& arg, const std::string& db_flag) {
  if (fs::is_regular_file(arg)) return bug_report_from_json(read_json_file(arg));
  return Store(resolve_db(db_flag)).load_report(arg);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bug-reporting toolkit for GUI applications: rip, report, replay, triage."};
  app.require_subcommand(1);

  std::string db_flag;

  // rip
  auto* rip_cmd = app.add_subcommand("rip", "Explore an app model and write its database");
  std::string rip_model, rip_out;
  RipConfig rip_config;
  AnalysisConfig analysis;
  rip_cmd->add_option("model", rip_model, "App model JSON file")->required();
  rip_cmd->add_option("--out", rip_out, "Store root to write db/<app>/<version> into")->required();
  rip_cmd->add_option("--max-events", rip_config.max_events, "Event budget")->check(CLI::PositiveNumber);
  rip_cmd->add_option("--max-depth", rip_config.max_depth, "Depth limit")->check(CLI::PositiveNumber);
  rip_cmd->add_option("--ngram-order", analysis.ngram_order, "n-gram order")->check(CLI::Range(2, 16));
  rip_cmd->add_option("--alpha", analysis.ngram_alpha, "Laplace smoothing constant")->check(CLI::PositiveNumber);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve the reporter API over HTTP");
  int port = 8080;
  std::string host = "127.0.0.1";
  serve_cmd->add_option("--db", db_flag, "Store root");
  serve_cmd->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", host, "Bind address");

  // report render
  auto* report_cmd = app.add_subcommand("report", "Report utilities");
  report_cmd->require_subcommand(1);
  auto* render_cmd = report_cmd->add_subcommand("render", "Render a stored report");
  std::string render_id, render_format = "md";
  render_cmd->add_option("id", render_id, "Report id")->required();
  render_cmd->add_option("--format", render_format, "md | html | json")
      ->check(CLI::IsMember({"md", "markdown", "html", "json"}));
  render_cmd->add_option("--db", db_flag, "Store root");

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Replay a report against an app model");
  std::string replay_report_arg, replay_model;
  replay_cmd->add_option("report", replay_report_arg, "Report JSON file or stored report id")->required();
  replay_cmd->add_option("model", replay_model, "Target app model JSON file")->required();
  replay_cmd->add_option("--db", db_flag, "Store root (when the report is an id)");

  // crashes
  auto* crash_cmd = app.add_subcommand("crashes", "Crawl an app model for crashes and emit reports");
  std::string crash_model, strategy_name = "dfs";
  std::uint64_t budget = 1000, seed = 0;
  crash_cmd->add_option("model", crash_model, "App model JSON file")->required();
  crash_cmd->add_option("--strategy", strategy_name, "dfs | random | ngram")
      ->check(CLI::IsMember({"dfs", "random", "ngram"}));
  crash_cmd->add_option("--budget", budget, "Event budget for random strategies")->check(CLI::PositiveNumber);
  crash_cmd->add_option("--seed", seed, "Random seed");
  crash_cmd->add_option("--db", db_flag, "Store root to persist the reports into");

  // dedup
  auto* dedup_cmd = app.add_subcommand("dedup", "Detect duplicate reports in a store");
  SimilarityConfig sim;
  dedup_cmd->add_option("--db", db_flag, "Store root");
  dedup_cmd->add_option("--tau", sim.tau, "Duplicate threshold")->check(CLI::Range(0.0, 1.0));

  // triage
  auto* triage_cmd = app.add_subcommand("triage", "Rank developers for a report");
  std::string triage_report_arg, owners_file;
  triage_cmd->add_option("report", triage_report_arg, "Report JSON file or stored report id")->required();
  triage_cmd->add_option("--owners", owners_file, "owners.json")->required()->check(CLI::ExistingFile);
  triage_cmd->add_option("--db", db_flag, "Store root (when the report is an id)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return 1;
  }

  try {
    if (*rip_cmd) {
      analysis.rip = rip_config;
      const auto model = load_app_model(rip_model);
      const auto db = build_database(model, analysis);
      const auto dir = write_database(rip_out, db);
      Json summary = Json::object();
      summary["app_id"] = model.app_id;
      summary["version"] = model.version;
      summary["states"] = db.efg.states.size();
      summary["edges"] = db.efg.edges.size();
      summary["truncated"] = db.efg.truncated;
      summary["database"] = dir.string();
      out << canonical_dump(summary);
    } else if (*serve_cmd) {
      Store store(resolve_db(db_flag));
      ReporterService service(store);
      HttpService http(service);
      const int bound = http.bind(host, port);
      err << "serving " << store.root().string() << " on http://" << host << ":" << bound << "\n";
      g_running_server = &http;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      http.listen();
      g_running_server = nullptr;
    } else if (*render_cmd) {
      Store store(resolve_db(db_flag));
      out << store.report_document(render_id, *parse_report_format(render_format));
    } else if (*replay_cmd) {
      const auto report = load_report_arg(replay_report_arg, db_flag);
      out << canonical_dump(to_json(replay_report(report, load_app_model(replay_model))));
    } else if (*crash_cmd) {
      const auto model = load_app_model(crash_model);
      CrawlStrategy strategy = strategy_name == "dfs"      ? CrawlStrategy::dfs_complete()
                               : strategy_name == "random" ? CrawlStrategy::uniform_random(seed, budget)
                                                           : CrawlStrategy::ngram_weighted(seed, budget);
      const auto db = build_database(model);
      const bool persist = !db_flag.empty() || std::getenv("GUIFUSION_DB");
      CrawlOptions options;
      if (persist) options.created_at = utc_timestamp();
      auto reports = crawl_for_crashes(db, strategy, options);
      Json list = Json::array();
      if (persist) {
        Store store(resolve_db(db_flag));
        for (auto& r : reports) {
          r.report_id = store.next_report_id();
          store.save_report(r);
        }
      }
      for (const auto& r : reports) list.push_back(to_json(r));
      out << canonical_dump(list);
    } else if (*dedup_cmd) {
      Store store(resolve_db(db_flag));
      const auto result = detect_duplicates(store.load_reports(), sim);
      store.save_duplicates(result);
      out << canonical_dump(to_json(result));
    } else if (*triage_cmd) {
      const auto report = load_report_arg(triage_report_arg, db_flag);
      out << canonical_dump(to_json(triage_report(report, ownership_from_json(read_json_file(owners_file)))));
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error [" << error_name(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace guifusion
