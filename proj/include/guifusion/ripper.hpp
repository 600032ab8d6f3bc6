#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "guifusion/app_model.hpp"

namespace guifusion {

using Fingerprint = std::string;

struct VisibleComponent {
  ComponentId id;
  ComponentKind kind = ComponentKind::Button;
  std::string label;
  Bounds bounds;
  Capabilities caps;

  friend bool operator==(const VisibleComponent&, const VisibleComponent&) = default;
};

/// A run-time GUI state. Identity is the fingerprint, which covers the
/// screen and its sorted component tuples but never entered text.
struct GuiState {
  Fingerprint fingerprint;
  ScreenId screen;
  bool overlay = false;
  Canvas canvas;
  std::vector<VisibleComponent> visible_components;  // sorted by id
  std::map<ComponentId, std::string> entered_text;   // not part of identity

  const VisibleComponent* find(std::string_view component_id) const;
};

Json to_json(const GuiState& state);
GuiState gui_state_from_json(const Json& json);

/// An {action, component} event; text form "action@component".
struct EventToken {
  Action action = Action::Tap;
  ComponentId component;

  std::string to_text() const;
  static EventToken parse(std::string_view text);  // throws Error(InvalidArgument)

  friend bool operator==(const EventToken&, const EventToken&) = default;
  /// Canonical order: component id, then action rank.
  friend bool operator<(const EventToken& a, const EventToken& b) {
    if (a.component != b.component) return a.component < b.component;
    return action_rank(a.action) < action_rank(b.action);
  }
};

struct CrashOutcome {
  std::string exception;
  friend bool operator==(const CrashOutcome&, const CrashOutcome&) = default;
};

struct NoOp {
  friend bool operator==(const NoOp&, const NoOp&) = default;
};

using ExecutionResult = std::variant<GuiState, CrashOutcome, NoOp>;

GuiState make_state(const AppModel& model, const Screen& screen);
GuiState cold_start(const AppModel& model);

/// Fires one event. Throws Error(UnknownComponent) when the component is not
/// visible in `state`.
ExecutionResult execute_event(const AppModel& model, const GuiState& state, const EventToken& event,
                              const std::optional<std::string>& input_text = std::nullopt);

/// Events the component capabilities allow in `state`, in canonical order.
std::vector<EventToken> actionable_events(const GuiState& state);

struct EdgeTarget {
  std::optional<Fingerprint> state;
  std::optional<std::string> crash;

  bool is_crash() const { return crash.has_value(); }
  std::string to_text() const;  // fingerprint or "CRASH:<exception>"

  friend bool operator==(const EdgeTarget&, const EdgeTarget&) = default;
};

struct FlowEdge {
  Fingerprint from;
  EventToken event;
  EdgeTarget to;

  friend bool operator==(const FlowEdge&, const FlowEdge&) = default;
};

bool edge_less(const FlowEdge& a, const FlowEdge& b);

struct ScreenshotRef {
  Fingerprint state;
  std::optional<ComponentId> component;  // highlighted component
  std::string full;                      // screenshot id of the full frame
  std::optional<std::string> crop;       // present iff component is set

  friend bool operator==(const ScreenshotRef&, const ScreenshotRef&) = default;
};

class EventFlowGraph {
 public:
  std::string app_id;
  std::string version;
  Fingerprint cold_start;
  bool truncated = false;
  std::map<Fingerprint, GuiState> states;
  std::vector<FlowEdge> edges;  // sorted by edge_less
  std::vector<ScreenshotRef> screenshots;

  const GuiState& state(const Fingerprint& fp) const;
  std::vector<const FlowEdge*> outgoing(const Fingerprint& fp) const;
  const FlowEdge* find_edge(const Fingerprint& from, const EventToken& event) const;
  const ScreenshotRef* screenshot(const Fingerprint& fp,
                                  const std::optional<ComponentId>& component) const;
  /// Distinct event tokens over all edges, sorted.
  std::vector<EventToken> edge_tokens() const;
};

Json to_json(const EventFlowGraph& graph);
/// `states` must hold every state named by the graph file.
EventFlowGraph event_flow_graph_from_json(const Json& json, std::map<Fingerprint, GuiState> states);

struct RipConfig {
  std::uint64_t max_events = 10'000;
  std::uint32_t max_depth = 50;
  std::vector<std::string> type_inputs = {"", "test"};
  std::uint64_t seed = 0;  // reserved for randomized crawlers
};

/// Chronological events grouped by cold start; NoOp fires are not recorded.
using EventTrace = std::vector<std::vector<EventToken>>;

struct RipOutput {
  EventFlowGraph graph;
  EventTrace trace;
  std::map<std::string, std::string> svgs;  // screenshot id -> document
  std::uint64_t events_fired = 0;
  std::uint64_t restarts = 0;
};

RipOutput rip(const AppModel& model, const RipConfig& config = {});

std::string render_screenshot(const GuiState& state,
                              const std::optional<ComponentId>& highlight = std::nullopt);
std::string crop_screenshot(const GuiState& state, const ComponentId& component);

}  // namespace guifusion
