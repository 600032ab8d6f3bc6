#include "guifusion/app_model.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "guifusion/error.hpp"

namespace guifusion {

namespace {

constexpr std::string_view kCrashPrefix = "CRASH:";

[[noreturn]] void fail(ErrorCode code, const std::string& where, const std::string& what) {
  throw ParseError(code, where.empty() ? "/" : where, what);
}

std::string at(const std::string& base, std::string_view key) {
  return base + "/" + std::string(key);
}

std::string at(const std::string& base, std::size_t index) {
  return base + "/" + std::to_string(index);
}

void reject_unknown_keys(const Json& object, const std::string& where,
                         std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(ErrorCode::SyntaxError, at(where, key), "unexpected field \"" + key + "\"");
    }
  }
}

const Json& require(const Json& object, std::string_view key, const std::string& where) {
  auto it = object.find(std::string(key));
  if (it == object.end()) {
    fail(ErrorCode::SyntaxError, where, "missing field \"" + std::string(key) + "\"");
  }
  return *it;
}

std::string require_string(const Json& object, std::string_view key, const std::string& where) {
  const auto& value = require(object, key, where);
  if (!value.is_string()) fail(ErrorCode::SyntaxError, at(where, key), "expected a string");
  return value.get<std::string>();
}

std::string require_id(const Json& object, std::string_view key, const std::string& where) {
  auto id = require_string(object, key, where);
  if (id.empty()) fail(ErrorCode::SyntaxError, at(where, key), "identifier must not be empty");
  return id;
}

bool optional_bool(const Json& object, std::string_view key, const std::string& where) {
  auto it = object.find(std::string(key));
  if (it == object.end()) return false;
  if (!it->is_boolean()) fail(ErrorCode::SyntaxError, at(where, key), "expected a boolean");
  return it->get<bool>();
}

const Json& require_array(const Json& object, std::string_view key, const std::string& where) {
  const auto& value = require(object, key, where);
  if (!value.is_array()) fail(ErrorCode::SyntaxError, at(where, key), "expected an array");
  return value;
}

std::vector<int> int_array(const Json& value, std::size_t size, const std::string& where) {
  if (!value.is_array() || value.size() != size) {
    fail(ErrorCode::SyntaxError, where, "expected an array of " + std::to_string(size) + " integers");
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < size; ++i) {
    if (!value[i].is_number_integer()) fail(ErrorCode::SyntaxError, at(where, i), "expected an integer");
    out.push_back(value[i].get<int>());
  }
  return out;
}

GuiComponent parse_component(const Json& json, const std::string& where) {
  if (!json.is_object()) fail(ErrorCode::SyntaxError, where, "expected an object");
  reject_unknown_keys(json, where, {"id", "kind", "label", "bounds", "clickable", "long_clickable",
                                    "swipeable", "editable"});
  GuiComponent c;
  c.id = require_id(json, "id", where);
  auto kind_text = require_string(json, "kind", where);
  auto kind = parse_component_kind(kind_text);
  if (!kind) fail(ErrorCode::SyntaxError, at(where, "kind"), "unknown component kind \"" + kind_text + "\"");
  c.kind = *kind;
  if (json.contains("label")) c.label = require_string(json, "label", where);
  auto b = int_array(require(json, "bounds", where), 4, at(where, "bounds"));
  c.bounds = Bounds{b[0], b[1], b[2], b[3]};
  c.caps.clickable = optional_bool(json, "clickable", where);
  c.caps.long_clickable = optional_bool(json, "long_clickable", where);
  c.caps.swipeable = optional_bool(json, "swipeable", where);
  c.caps.editable = optional_bool(json, "editable", where);
  return c;
}

Screen parse_screen(const Json& json, const std::string& where) {
  if (!json.is_object()) fail(ErrorCode::SyntaxError, where, "expected an object");
  reject_unknown_keys(json, where, {"id", "activity", "overlay", "components"});
  Screen s;
  s.id = require_id(json, "id", where);
  s.activity = require_string(json, "activity", where);
  s.overlay = optional_bool(json, "overlay", where);
  const auto& components = require_array(json, "components", where);
  for (std::size_t i = 0; i < components.size(); ++i) {
    s.components.push_back(parse_component(components[i], at(at(where, "components"), i)));
  }
  return s;
}

Transition parse_transition(const Json& json, const std::string& where) {
  if (!json.is_object()) fail(ErrorCode::SyntaxError, where, "expected an object");
  reject_unknown_keys(json, where, {"from", "component", "action", "to"});
  Transition t;
  t.from = require_id(json, "from", where);
  t.component = require_id(json, "component", where);
  auto action_text = require_string(json, "action", where);
  auto action = parse_action(action_text);
  if (!action) fail(ErrorCode::SyntaxError, at(where, "action"), "unknown action \"" + action_text + "\"");
  t.action = *action;
  auto to = require_id(json, "to", where);
  if (to.starts_with(kCrashPrefix)) {
    auto exception = to.substr(kCrashPrefix.size());
    if (exception.empty()) fail(ErrorCode::SyntaxError, at(where, "to"), "crash marker without exception name");
    t.to = TransitionTarget::to_crash(std::move(exception));
  } else {
    t.to = TransitionTarget::to_screen(std::move(to));
  }
  return t;
}

// Converts a byte offset reported by the JSON parser into "line:column".
std::string line_column(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return std::to_string(line) + ":" + std::to_string(column);
}

}  // namespace

std::string_view to_string(Action action) {
  switch (action) {
    case Action::Tap: return "tap";
    case Action::LongTouch: return "long-touch";
    case Action::Swipe: return "swipe";
    case Action::Type: return "type";
  }
  return "tap";
}

std::optional<Action> parse_action(std::string_view text) {
  for (auto a : kAllActions) {
    if (to_string(a) == text) return a;
  }
  return std::nullopt;
}

int action_rank(Action action) { return static_cast<int>(action); }

std::string_view to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::Button: return "button";
    case ComponentKind::TextView: return "textview";
    case ComponentKind::EditText: return "edittext";
    case ComponentKind::Spinner: return "spinner";
    case ComponentKind::CheckBox: return "checkbox";
    case ComponentKind::Image: return "image";
    case ComponentKind::ListItem: return "list-item";
  }
  return "button";
}

std::optional<ComponentKind> parse_component_kind(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(ComponentKind::ListItem); ++i) {
    auto kind = static_cast<ComponentKind>(i);
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

bool Capabilities::permits(Action action) const {
  switch (action) {
    case Action::Tap: return clickable;
    case Action::LongTouch: return long_clickable;
    case Action::Swipe: return swipeable;
    case Action::Type: return editable;
  }
  return false;
}

std::string TransitionTarget::to_text() const {
  if (crash) return std::string(kCrashPrefix) + *crash;
  return screen.value_or("");
}

std::string_view to_string(RelativeLocation location) {
  switch (location) {
    case RelativeLocation::TopLeft: return "top-left";
    case RelativeLocation::TopCenter: return "top-center";
    case RelativeLocation::TopRight: return "top-right";
    case RelativeLocation::MiddleLeft: return "middle-left";
    case RelativeLocation::MiddleCenter: return "middle-center";
    case RelativeLocation::MiddleRight: return "middle-right";
    case RelativeLocation::BottomLeft: return "bottom-left";
    case RelativeLocation::BottomCenter: return "bottom-center";
    case RelativeLocation::BottomRight: return "bottom-right";
  }
  return "middle-center";
}

std::optional<RelativeLocation> parse_relative_location(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(RelativeLocation::BottomRight); ++i) {
    auto loc = static_cast<RelativeLocation>(i);
    if (to_string(loc) == text) return loc;
  }
  return std::nullopt;
}

RelativeLocation relative_location(const Bounds& bounds, const Canvas& canvas) {
  // Work in doubled coordinates so half-pixel centres stay exact:
  // centre < extent/3  <=>  3 * (2 * origin + size) < 2 * extent.
  auto third = [](long long origin, long long size, long long extent) {
    long long doubled_centre = 2 * origin + size;
    if (3 * doubled_centre < 2 * extent) return 0;
    if (3 * doubled_centre < 4 * extent) return 1;
    return 2;
  };
  int column = third(bounds.x, bounds.w, canvas.width);
  int row = third(bounds.y, bounds.h, canvas.height);
  return static_cast<RelativeLocation>(row * 3 + column);
}

const Screen* AppModel::find_screen(std::string_view id) const {
  for (const auto& s : screens) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const GuiComponent* AppModel::find_component(std::string_view id) const {
  for (const auto& s : screens) {
    for (const auto& c : s.components) {
      if (c.id == id) return &c;
    }
  }
  return nullptr;
}

const Screen* AppModel::screen_of(std::string_view component_id) const {
  for (const auto& s : screens) {
    for (const auto& c : s.components) {
      if (c.id == component_id) return &s;
    }
  }
  return nullptr;
}

const Transition* AppModel::find_transition(std::string_view from, std::string_view component,
                                            Action action) const {
  for (const auto& t : transitions) {
    if (t.from == from && t.component == component && t.action == action) return &t;
  }
  return nullptr;
}

std::size_t AppModel::component_count() const {
  std::size_t n = 0;
  for (const auto& s : screens) n += s.components.size();
  return n;
}

void AppModel::validate() const {
  if (app_id.empty()) fail(ErrorCode::SyntaxError, "/app_id", "identifier must not be empty");
  if (version.empty()) fail(ErrorCode::SyntaxError, "/version", "identifier must not be empty");
  if (canvas.width <= 0 || canvas.height <= 0) {
    fail(ErrorCode::SyntaxError, "/canvas", "canvas dimensions must be positive");
  }

  std::unordered_set<std::string> screen_ids;
  std::unordered_set<std::string> component_ids;
  for (std::size_t si = 0; si < screens.size(); ++si) {
    const auto& screen = screens[si];
    const auto where = at("/screens", si);
    if (!screen_ids.insert(screen.id).second) {
      fail(ErrorCode::DuplicateId, at(where, "id"), "duplicate screen id \"" + screen.id + "\"");
    }
    if (screen.components.empty()) {
      fail(ErrorCode::SyntaxError, at(where, "components"), "screen \"" + screen.id + "\" has no components");
    }
    for (std::size_t ci = 0; ci < screen.components.size(); ++ci) {
      const auto& c = screen.components[ci];
      const auto cwhere = at(at(where, "components"), ci);
      if (!component_ids.insert(c.id).second) {
        fail(ErrorCode::DuplicateId, at(cwhere, "id"), "duplicate component id \"" + c.id + "\"");
      }
      const auto& b = c.bounds;
      if (b.w <= 0 || b.h <= 0) {
        fail(ErrorCode::SyntaxError, at(cwhere, "bounds"), "component \"" + c.id + "\" has an empty extent");
      }
      if (b.x < 0 || b.y < 0 || static_cast<long long>(b.x) + b.w > canvas.width ||
          static_cast<long long>(b.y) + b.h > canvas.height) {
        fail(ErrorCode::SyntaxError, at(cwhere, "bounds"), "component \"" + c.id + "\" lies outside the canvas");
      }
      if (c.caps.editable && c.kind != ComponentKind::EditText) {
        fail(ErrorCode::CapabilityMismatch, at(cwhere, "editable"),
             "component \"" + c.id + "\" is editable but not an edittext");
      }
    }
  }

  if (!find_screen(initial_screen)) {
    fail(ErrorCode::UnknownReference, "/initial_screen", "unknown screen \"" + initial_screen + "\"");
  }

  std::set<std::pair<std::string, int>> seen;
  for (std::size_t ti = 0; ti < transitions.size(); ++ti) {
    const auto& t = transitions[ti];
    const auto where = at("/transitions", ti);
    const Screen* from = find_screen(t.from);
    if (!from) fail(ErrorCode::UnknownReference, at(where, "from"), "unknown screen \"" + t.from + "\"");
    const GuiComponent* component = nullptr;
    for (const auto& c : from->components) {
      if (c.id == t.component) component = &c;
    }
    if (!component) {
      fail(ErrorCode::UnknownReference, at(where, "component"),
           "component \"" + t.component + "\" is not on screen \"" + t.from + "\"");
    }
    if (!component->caps.permits(t.action)) {
      fail(ErrorCode::CapabilityMismatch, at(where, "action"),
           "component \"" + t.component + "\" does not permit " + std::string(to_string(t.action)));
    }
    if (!t.to.is_crash() && !find_screen(*t.to.screen)) {
      fail(ErrorCode::UnknownReference, at(where, "to"), "unknown screen \"" + *t.to.screen + "\"");
    }
    if (!seen.emplace(t.component, action_rank(t.action)).second) {
      fail(ErrorCode::DuplicateId, where,
           "duplicate transition for " + std::string(to_string(t.action)) + "@" + t.component);
    }
  }
}

AppModel parse_app_model(std::string_view source_text) {
  Json doc;
  try {
    doc = Json::parse(source_text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError(ErrorCode::SyntaxError, line_column(source_text, offset), "malformed JSON document");
  }
  if (!doc.is_object()) fail(ErrorCode::SyntaxError, "", "expected a JSON object");
  reject_unknown_keys(doc, "", {"app_id", "version", "canvas", "initial_screen", "screens", "transitions"});

  AppModel model;
  model.app_id = require_id(doc, "app_id", "");
  model.version = require_id(doc, "version", "");
  if (doc.contains("canvas")) {
    auto c = int_array(doc["canvas"], 2, "/canvas");
    model.canvas = Canvas{c[0], c[1]};
  }
  model.initial_screen = require_id(doc, "initial_screen", "");
  const auto& screens = require_array(doc, "screens", "");
  for (std::size_t i = 0; i < screens.size(); ++i) {
    model.screens.push_back(parse_screen(screens[i], at("/screens", i)));
  }
  const auto& transitions = require_array(doc, "transitions", "");
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    model.transitions.push_back(parse_transition(transitions[i], at("/transitions", i)));
  }
  model.validate();
  return model;
}

AppModel load_app_model(const std::filesystem::path& path) { return parse_app_model(read_file(path)); }

Json to_json(const AppModel& model) {
  Json doc = Json::object();
  doc["app_id"] = model.app_id;
  doc["version"] = model.version;
  doc["canvas"] = Json::array({model.canvas.width, model.canvas.height});
  doc["initial_screen"] = model.initial_screen;
  Json screens = Json::array();
  for (const auto& s : model.screens) {
    Json js = Json::object();
    js["id"] = s.id;
    js["activity"] = s.activity;
    js["overlay"] = s.overlay;
    Json components = Json::array();
    for (const auto& c : s.components) {
      Json jc = Json::object();
      jc["id"] = c.id;
      jc["kind"] = to_string(c.kind);
      jc["label"] = c.label;
      jc["bounds"] = Json::array({c.bounds.x, c.bounds.y, c.bounds.w, c.bounds.h});
      jc["clickable"] = c.caps.clickable;
      jc["long_clickable"] = c.caps.long_clickable;
      jc["swipeable"] = c.caps.swipeable;
      jc["editable"] = c.caps.editable;
      components.push_back(std::move(jc));
    }
    js["components"] = std::move(components);
    screens.push_back(std::move(js));
  }
  doc["screens"] = std::move(screens);
  Json transitions = Json::array();
  for (const auto& t : model.transitions) {
    Json jt = Json::object();
    jt["from"] = t.from;
    jt["component"] = t.component;
    jt["action"] = to_string(t.action);
    jt["to"] = t.to.to_text();
    transitions.push_back(std::move(jt));
  }
  doc["transitions"] = std::move(transitions);
  return doc;
}

std::string serialize_app_model(const AppModel& model) { return canonical_dump(to_json(model)); }

Json to_json(const ComponentRecord& r) {
  Json j = Json::object();
  j["component_id"] = r.component_id;
  j["kind"] = to_string(r.kind);
  j["label"] = r.label;
  j["bounds"] = Json::array({r.bounds.x, r.bounds.y, r.bounds.w, r.bounds.h});
  j["relative_location"] = to_string(r.relative_location);
  j["activity"] = r.activity;
  j["screen"] = r.screen;
  return j;
}

ComponentRecord component_record_from_json(const Json& j) {
  ComponentRecord r;
  r.component_id = j.at("component_id").get<std::string>();
  r.kind = parse_component_kind(j.at("kind").get<std::string>()).value();
  r.label = j.at("label").get<std::string>();
  const auto& b = j.at("bounds");
  r.bounds = Bounds{b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
  r.relative_location = parse_relative_location(j.at("relative_location").get<std::string>()).value();
  r.activity = j.at("activity").get<std::string>();
  r.screen = j.at("screen").get<std::string>();
  return r;
}

std::vector<ComponentRecord> extract_component_universe(const AppModel& model) {
  std::vector<ComponentRecord> records;
  records.reserve(model.component_count());
  for (const auto& s : model.screens) {
    for (const auto& c : s.components) {
      records.push_back(ComponentRecord{c.id, c.kind, c.label, c.bounds,
                                        relative_location(c.bounds, model.canvas), s.activity, s.id});
    }
  }
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.screen, a.component_id) < std::tie(b.screen, b.component_id);
  });
  return records;
}

}  // namespace guifusion
