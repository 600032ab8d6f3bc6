#include "guifusion/ripper.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "guifusion/error.hpp"

namespace guifusion {

namespace {

std::string compute_fingerprint(const ScreenId& screen, const std::vector<VisibleComponent>& components) {
  std::ostringstream key;
  key << "screen:" << screen << '\n';
  for (const auto& c : components) {
    key << c.id << '|' << to_string(c.kind) << '|' << c.label << '|' << c.bounds.x << ',' << c.bounds.y
        << ',' << c.bounds.w << ',' << c.bounds.h << '|' << c.caps.clickable << c.caps.long_clickable
        << c.caps.swipeable << c.caps.editable << '\n';
  }
  return content_digest(key.str());
}

Json component_json(const VisibleComponent& c) {
  Json j = Json::object();
  j["id"] = c.id;
  j["kind"] = to_string(c.kind);
  j["label"] = c.label;
  j["bounds"] = Json::array({c.bounds.x, c.bounds.y, c.bounds.w, c.bounds.h});
  j["clickable"] = c.caps.clickable;
  j["long_clickable"] = c.caps.long_clickable;
  j["swipeable"] = c.caps.swipeable;
  j["editable"] = c.caps.editable;
  return j;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string svg_document(const GuiState& state, const std::optional<ComponentId>& highlight,
                         const Bounds& viewport) {
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << viewport.w << "\" height=\""
      << viewport.h << "\" viewBox=\"" << viewport.x << ' ' << viewport.y << ' ' << viewport.w << ' '
      << viewport.h << "\">\n";
  const int width = state.canvas.width;
  const int height = state.canvas.height;
  svg << "  <rect class=\"frame\" x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#fafafa\" stroke=\"#424242\" stroke-width=\"2\"/>\n";
  if (state.overlay) {
    svg << "  <rect class=\"scrim\" x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
        << "\" fill=\"#000000\" fill-opacity=\"0.3\"/>\n";
  }
  svg << "  <text class=\"screen\" x=\"4\" y=\"" << height - 4
      << "\" font-family=\"monospace\" font-size=\"10\" fill=\"#757575\">" << xml_escape(state.screen)
      << "</text>\n";
  for (const auto& c : state.visible_components) {
    const auto& b = c.bounds;
    svg << "  <g class=\"component\" data-id=\"" << xml_escape(c.id) << "\" data-kind=\""
        << to_string(c.kind) << "\">\n";
    svg << "    <rect x=\"" << b.x << "\" y=\"" << b.y << "\" width=\"" << b.w << "\" height=\"" << b.h
        << "\" fill=\"#e3f2fd\" stroke=\"#1565c0\" stroke-width=\"1\"/>\n";
    // Centre in doubled coordinates keeps odd sizes exact.
    const int cx2 = 2 * b.x + b.w;
    const int cy2 = 2 * b.y + b.h;
    svg << "    <text x=\"" << cx2 / 2 << (cx2 % 2 ? ".5" : "") << "\" y=\"" << cy2 / 2
        << (cy2 % 2 ? ".5" : "")
        << "\" text-anchor=\"middle\" dominant-baseline=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\" fill=\"#0d47a1\">"
        << xml_escape(c.label.empty() ? std::string(to_string(c.kind)) : c.label) << "</text>\n";
    svg << "  </g>\n";
  }
  if (highlight) {
    const auto* c = state.find(*highlight);
    const auto& b = c->bounds;
    svg << "  <rect class=\"highlight\" x=\"" << b.x << "\" y=\"" << b.y << "\" width=\"" << b.w
        << "\" height=\"" << b.h << "\" fill=\"none\" stroke=\"#d50000\" stroke-width=\"4\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

const VisibleComponent& require_visible(const GuiState& state, const ComponentId& component) {
  const auto* c = state.find(component);
  if (!c) {
    throw Error(ErrorCode::UnknownComponent,
                "component \"" + component + "\" is not visible on screen \"" + state.screen + "\"");
  }
  return *c;
}

// Simulated device: holds the interpreter's current state and records the
// chronological event trace, one episode per cold start.
class Device {
 public:
  Device(const AppModel& model, EventTrace& trace) : model_(model), trace_(trace) { restart(); }

  void restart() {
    current_ = cold_start(model_);
    crashed_ = false;
    if (trace_.empty() || !trace_.back().empty()) trace_.emplace_back();
  }

  ExecutionResult fire(const EventToken& event, const std::optional<std::string>& text) {
    auto result = execute_event(model_, current_, event, text);
    if (std::holds_alternative<NoOp>(result)) return result;
    trace_.back().push_back(event);
    if (auto* next = std::get_if<GuiState>(&result)) {
      current_ = *next;
    } else {
      crashed_ = true;
    }
    return result;
  }

  bool at(const Fingerprint& fp) const { return !crashed_ && current_.fingerprint == fp; }

 private:
  const AppModel& model_;
  EventTrace& trace_;
  GuiState current_;
  bool crashed_ = false;
};

class DfsRipper {
 public:
  DfsRipper(const AppModel& model, const RipConfig& config)
      : model_(model), config_(config), device_(model, out_.trace) {}

  RipOutput run() {
    auto& graph = out_.graph;
    graph.app_id = model_.app_id;
    graph.version = model_.version;
    GuiState start = cold_start(model_);
    graph.cold_start = start.fingerprint;
    discover(start);
    std::vector<EventToken> path;
    explore(graph.cold_start, path);

    std::sort(graph.edges.begin(), graph.edges.end(), edge_less);
    std::sort(graph.screenshots.begin(), graph.screenshots.end(), [](const auto& a, const auto& b) {
      return std::tie(a.state, a.component) < std::tie(b.state, b.component);
    });
    if (!out_.trace.empty() && out_.trace.back().empty()) out_.trace.pop_back();
    return std::move(out_);
  }

 private:
  bool budget_left() const { return out_.events_fired < config_.max_events; }

  void discover(const GuiState& state) {
    GuiState stored = state;
    stored.entered_text.clear();
    out_.graph.states.emplace(stored.fingerprint, stored);
    auto add_svg = [this](std::string svg) {
      auto id = content_digest(svg);
      out_.svgs.emplace(id, std::move(svg));
      return id;
    };
    out_.graph.screenshots.push_back(
        ScreenshotRef{stored.fingerprint, std::nullopt, add_svg(render_screenshot(stored)), std::nullopt});
    for (const auto& c : stored.visible_components) {
      out_.graph.screenshots.push_back(ScreenshotRef{stored.fingerprint, c.id,
                                                     add_svg(render_screenshot(stored, c.id)),
                                                     add_svg(crop_screenshot(stored, c.id))});
    }
  }

  void bring_device_to(const Fingerprint& fp, const std::vector<EventToken>& path) {
    if (device_.at(fp)) return;
    device_.restart();
    ++out_.restarts;
    for (const auto& event : path) {
      // Replay of an already-recorded edge; the interpreter is deterministic
      // and the typed text never affects the outcome.
      device_.fire(event, event.action == Action::Type ? std::optional<std::string>(first_input())
                                                       : std::nullopt);
    }
  }

  std::string first_input() const {
    return config_.type_inputs.empty() ? std::string() : config_.type_inputs.front();
  }

  ExecutionResult fire_exploration(const EventToken& event) {
    if (event.action != Action::Type || config_.type_inputs.empty()) {
      ++out_.events_fired;
      return device_.fire(event, std::nullopt);
    }
    ExecutionResult result = NoOp{};
    for (const auto& input : config_.type_inputs) {
      if (!budget_left()) break;
      ++out_.events_fired;
      result = device_.fire(event, input);
      if (!std::holds_alternative<NoOp>(result)) break;
    }
    return result;
  }

  void explore(const Fingerprint& fp, std::vector<EventToken>& path) {
    const auto events = actionable_events(out_.graph.states.at(fp));
    if (path.size() >= config_.max_depth) {
      if (!events.empty()) out_.graph.truncated = true;
      return;
    }
    for (const auto& event : events) {
      if (!budget_left()) {
        out_.graph.truncated = true;
        return;
      }
      bring_device_to(fp, path);
      auto result = fire_exploration(event);
      if (std::holds_alternative<NoOp>(result)) continue;
      if (const auto* crash = std::get_if<CrashOutcome>(&result)) {
        out_.graph.edges.push_back(FlowEdge{fp, event, EdgeTarget{std::nullopt, crash->exception}});
        continue;
      }
      const auto& next = std::get<GuiState>(result);
      out_.graph.edges.push_back(FlowEdge{fp, event, EdgeTarget{next.fingerprint, std::nullopt}});
      if (out_.graph.states.count(next.fingerprint)) continue;
      discover(next);
      path.push_back(event);
      explore(next.fingerprint, path);
      path.pop_back();
    }
  }

  const AppModel& model_;
  const RipConfig& config_;
  RipOutput out_;
  Device device_;
};

}  // namespace

const VisibleComponent* GuiState::find(std::string_view component_id) const {
  auto it = std::lower_bound(visible_components.begin(), visible_components.end(), component_id,
                             [](const VisibleComponent& c, std::string_view id) { return c.id < id; });
  if (it == visible_components.end() || it->id != component_id) return nullptr;
  return &*it;
}

Json to_json(const GuiState& state) {
  Json j = Json::object();
  j["fingerprint"] = state.fingerprint;
  j["screen"] = state.screen;
  j["overlay"] = state.overlay;
  j["canvas"] = Json::array({state.canvas.width, state.canvas.height});
  Json components = Json::array();
  for (const auto& c : state.visible_components) components.push_back(component_json(c));
  j["visible_components"] = std::move(components);
  return j;
}

GuiState gui_state_from_json(const Json& j) {
  GuiState s;
  s.fingerprint = j.at("fingerprint").get<std::string>();
  s.screen = j.at("screen").get<std::string>();
  s.overlay = j.at("overlay").get<bool>();
  s.canvas = Canvas{j.at("canvas").at(0).get<int>(), j.at("canvas").at(1).get<int>()};
  for (const auto& jc : j.at("visible_components")) {
    VisibleComponent c;
    c.id = jc.at("id").get<std::string>();
    c.kind = parse_component_kind(jc.at("kind").get<std::string>()).value();
    c.label = jc.at("label").get<std::string>();
    const auto& b = jc.at("bounds");
    c.bounds = Bounds{b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
    c.caps = Capabilities{jc.at("clickable").get<bool>(), jc.at("long_clickable").get<bool>(),
                          jc.at("swipeable").get<bool>(), jc.at("editable").get<bool>()};
    s.visible_components.push_back(std::move(c));
  }
  return s;
}

std::string EventToken::to_text() const { return std::string(to_string(action)) + "@" + component; }

EventToken EventToken::parse(std::string_view text) {
  auto at = text.find('@');
  if (at == std::string_view::npos || at + 1 >= text.size()) {
    throw Error(ErrorCode::InvalidArgument, "malformed event token \"" + std::string(text) + "\"");
  }
  auto action = parse_action(text.substr(0, at));
  if (!action) throw Error(ErrorCode::InvalidArgument, "unknown action in \"" + std::string(text) + "\"");
  return EventToken{*action, std::string(text.substr(at + 1))};
}

GuiState make_state(const AppModel& model, const Screen& screen) {
  GuiState s;
  s.screen = screen.id;
  s.overlay = screen.overlay;
  s.canvas = model.canvas;
  for (const auto& c : screen.components) {
    s.visible_components.push_back(VisibleComponent{c.id, c.kind, c.label, c.bounds, c.caps});
  }
  std::sort(s.visible_components.begin(), s.visible_components.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  s.fingerprint = compute_fingerprint(s.screen, s.visible_components);
  return s;
}

GuiState cold_start(const AppModel& model) {
  return make_state(model, *model.find_screen(model.initial_screen));
}

ExecutionResult execute_event(const AppModel& model, const GuiState& state, const EventToken& event,
                              const std::optional<std::string>& input_text) {
  require_visible(state, event.component);
  const auto* t = model.find_transition(state.screen, event.component, event.action);
  if (!t) return NoOp{};
  if (t->to.is_crash()) return CrashOutcome{*t->to.crash};
  GuiState next = make_state(model, *model.find_screen(*t->to.screen));
  if (next.screen == state.screen) next.entered_text = state.entered_text;
  if (event.action == Action::Type && input_text) next.entered_text[event.component] = *input_text;
  return next;
}

std::vector<EventToken> actionable_events(const GuiState& state) {
  std::vector<EventToken> events;
  for (const auto& c : state.visible_components) {
    for (auto action : kAllActions) {
      if (c.caps.permits(action)) events.push_back(EventToken{action, c.id});
    }
  }
  return events;
}

std::string EdgeTarget::to_text() const {
  if (crash) return "CRASH:" + *crash;
  return state.value_or("");
}

bool edge_less(const FlowEdge& a, const FlowEdge& b) {
  if (a.from != b.from) return a.from < b.from;
  if (!(a.event == b.event)) return a.event < b.event;
  return a.to.to_text() < b.to.to_text();
}

const GuiState& EventFlowGraph::state(const Fingerprint& fp) const {
  auto it = states.find(fp);
  if (it == states.end()) throw Error(ErrorCode::InvalidArgument, "unknown state " + fp);
  return it->second;
}

std::vector<const FlowEdge*> EventFlowGraph::outgoing(const Fingerprint& fp) const {
  std::vector<const FlowEdge*> out;
  for (const auto& e : edges) {
    if (e.from == fp) out.push_back(&e);
  }
  return out;
}

const FlowEdge* EventFlowGraph::find_edge(const Fingerprint& from, const EventToken& event) const {
  for (const auto& e : edges) {
    if (e.from == from && e.event == event) return &e;
  }
  return nullptr;
}

const ScreenshotRef* EventFlowGraph::screenshot(const Fingerprint& fp,
                                                const std::optional<ComponentId>& component) const {
  for (const auto& s : screenshots) {
    if (s.state == fp && s.component == component) return &s;
  }
  return nullptr;
}

std::vector<EventToken> EventFlowGraph::edge_tokens() const {
  std::vector<EventToken> tokens;
  for (const auto& e : edges) tokens.push_back(e.event);
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

Json to_json(const EventFlowGraph& graph) {
  Json j = Json::object();
  j["app_id"] = graph.app_id;
  j["version"] = graph.version;
  j["cold_start"] = graph.cold_start;
  j["truncated"] = graph.truncated;
  Json states = Json::array();
  for (const auto& [fp, _] : graph.states) states.push_back(fp);
  j["states"] = std::move(states);
  Json edges = Json::array();
  for (const auto& e : graph.edges) {
    Json je = Json::object();
    je["from"] = e.from;
    je["event"] = e.event.to_text();
    je["to"] = e.to.to_text();
    edges.push_back(std::move(je));
  }
  j["edges"] = std::move(edges);
  Json shots = Json::array();
  for (const auto& s : graph.screenshots) {
    Json js = Json::object();
    js["state"] = s.state;
    js["component"] = s.component ? Json(*s.component) : Json(nullptr);
    js["full"] = s.full;
    js["crop"] = s.crop ? Json(*s.crop) : Json(nullptr);
    shots.push_back(std::move(js));
  }
  j["screenshots"] = std::move(shots);
  return j;
}

EventFlowGraph event_flow_graph_from_json(const Json& j, std::map<Fingerprint, GuiState> states) {
  EventFlowGraph g;
  g.app_id = j.at("app_id").get<std::string>();
  g.version = j.at("version").get<std::string>();
  g.cold_start = j.at("cold_start").get<std::string>();
  g.truncated = j.at("truncated").get<bool>();
  for (const auto& fp : j.at("states")) {
    auto key = fp.get<std::string>();
    auto it = states.find(key);
    if (it == states.end()) throw Error(ErrorCode::Io, "missing state file for " + key);
    g.states.emplace(key, std::move(it->second));
  }
  for (const auto& je : j.at("edges")) {
    FlowEdge e;
    e.from = je.at("from").get<std::string>();
    e.event = EventToken::parse(je.at("event").get<std::string>());
    auto to = je.at("to").get<std::string>();
    if (to.starts_with("CRASH:")) {
      e.to.crash = to.substr(6);
    } else {
      e.to.state = to;
    }
    g.edges.push_back(std::move(e));
  }
  for (const auto& js : j.at("screenshots")) {
    ScreenshotRef s;
    s.state = js.at("state").get<std::string>();
    if (!js.at("component").is_null()) s.component = js.at("component").get<std::string>();
    s.full = js.at("full").get<std::string>();
    if (!js.at("crop").is_null()) s.crop = js.at("crop").get<std::string>();
    g.screenshots.push_back(std::move(s));
  }
  return g;
}

RipOutput rip(const AppModel& model, const RipConfig& config) {
  if (config.max_events == 0 || config.max_depth == 0) {
    throw Error(ErrorCode::InvalidArgument, "rip budgets must be positive");
  }
  return DfsRipper(model, config).run();
}

std::string render_screenshot(const GuiState& state, const std::optional<ComponentId>& highlight) {
  if (highlight) require_visible(state, *highlight);
  return svg_document(state, highlight, Bounds{0, 0, state.canvas.width, state.canvas.height});
}

std::string crop_screenshot(const GuiState& state, const ComponentId& component) {
  const auto& c = require_visible(state, component);
  return svg_document(state, std::nullopt, c.bounds);
}

}  // namespace guifusion
