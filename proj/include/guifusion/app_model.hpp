#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guifusion/canonical.hpp"

namespace guifusion {

using ScreenId = std::string;
using ComponentId = std::string;

enum class Action { Tap, LongTouch, Swipe, Type };

/// Canonical exploration/presentation order.
inline constexpr std::array<Action, 4> kAllActions = {Action::Tap, Action::LongTouch,
                                                      Action::Swipe, Action::Type};

std::string_view to_string(Action action);
std::optional<Action> parse_action(std::string_view text);
int action_rank(Action action);

enum class ComponentKind { Button, TextView, EditText, Spinner, CheckBox, Image, ListItem };

std::string_view to_string(ComponentKind kind);
std::optional<ComponentKind> parse_component_kind(std::string_view text);

struct Bounds {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct Canvas {
  int width = 360;
  int height = 640;

  friend bool operator==(const Canvas&, const Canvas&) = default;
};

struct Capabilities {
  bool clickable = false;
  bool long_clickable = false;
  bool swipeable = false;
  bool editable = false;

  bool permits(Action action) const;

  friend bool operator==(const Capabilities&, const Capabilities&) = default;
};

struct GuiComponent {
  ComponentId id;
  ComponentKind kind = ComponentKind::Button;
  std::string label;
  Bounds bounds;
  Capabilities caps;

  friend bool operator==(const GuiComponent&, const GuiComponent&) = default;
};

struct Screen {
  ScreenId id;
  std::string activity;
  bool overlay = false;
  std::vector<GuiComponent> components;

  friend bool operator==(const Screen&, const Screen&) = default;
};

/// Target of a transition: either a screen or a declared crash.
struct TransitionTarget {
  std::optional<ScreenId> screen;
  std::optional<std::string> crash;  // exception name

  bool is_crash() const { return crash.has_value(); }
  std::string to_text() const;  // "<screen>" or "CRASH:<exception>"
  static TransitionTarget to_screen(ScreenId id) { return {std::move(id), std::nullopt}; }
  static TransitionTarget to_crash(std::string exception) {
    return {std::nullopt, std::move(exception)};
  }

  friend bool operator==(const TransitionTarget&, const TransitionTarget&) = default;
};

struct Transition {
  ScreenId from;
  ComponentId component;
  Action action = Action::Tap;
  TransitionTarget to;

  friend bool operator==(const Transition&, const Transition&) = default;
};

enum class RelativeLocation {
  TopLeft, TopCenter, TopRight,
  MiddleLeft, MiddleCenter, MiddleRight,
  BottomLeft, BottomCenter, BottomRight,
};

std::string_view to_string(RelativeLocation location);
std::optional<RelativeLocation> parse_relative_location(std::string_view text);

/// 3x3 grid over canvas thirds, evaluated at the bounds centre. Intervals are
/// half-open except the last, which is closed at the canvas edge.
RelativeLocation relative_location(const Bounds& bounds, const Canvas& canvas);

/// A validated application model. Construct through parse_app_model or
/// AppModel::validated; both enforce every structural invariant.
class AppModel {
 public:
  std::string app_id;
  std::string version;
  Canvas canvas;
  ScreenId initial_screen;
  std::vector<Screen> screens;
  std::vector<Transition> transitions;

  const Screen* find_screen(std::string_view id) const;
  const GuiComponent* find_component(std::string_view id) const;
  /// Screen that owns the component, or nullptr.
  const Screen* screen_of(std::string_view component_id) const;
  const Transition* find_transition(std::string_view from, std::string_view component,
                                    Action action) const;
  std::size_t component_count() const;

  /// Throws ParseError on the first violated invariant.
  void validate() const;

  friend bool operator==(const AppModel&, const AppModel&) = default;
};

AppModel parse_app_model(std::string_view source_text);
AppModel load_app_model(const std::filesystem::path& path);
Json to_json(const AppModel& model);
std::string serialize_app_model(const AppModel& model);

/// Primer output row: a component plus its traceability link.
struct ComponentRecord {
  ComponentId component_id;
  ComponentKind kind = ComponentKind::Button;
  std::string label;
  Bounds bounds;
  RelativeLocation relative_location = RelativeLocation::MiddleCenter;
  std::string activity;
  ScreenId screen;

  friend bool operator==(const ComponentRecord&, const ComponentRecord&) = default;
};

Json to_json(const ComponentRecord& record);
ComponentRecord component_record_from_json(const Json& json);

/// One record per component, sorted by (screen id, component id).
std::vector<ComponentRecord> extract_component_universe(const AppModel& model);

}  // namespace guifusion
