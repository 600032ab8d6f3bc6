#include "guifusion/flow.hpp"

#include <algorithm>
#include <set>

#include "guifusion/error.hpp"

namespace guifusion {

namespace {

Json optional_json(const std::optional<std::string>& value) {
  return value ? Json(*value) : Json(nullptr);
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

const ComponentRecord* find_record(std::span<const ComponentRecord> universe, std::string_view id) {
  for (const auto& r : universe) {
    if (r.component_id == id) return &r;
  }
  return nullptr;
}

void count_episode(NGramModel& model, std::span<const EventToken> episode) {
  NGramModel::Context window(static_cast<std::size_t>(model.order - 1), std::string(kStartToken));
  for (const auto& token : episode) {
    auto text = token.to_text();
    ++model.counts[window][text];
    window.erase(window.begin());
    window.push_back(std::move(text));
  }
}

void finish_vocabulary(NGramModel& model, std::span<const EventToken> extra) {
  std::set<std::string> vocab;
  for (const auto& t : extra) vocab.insert(t.to_text());
  for (const auto& [_, next] : model.counts) {
    for (const auto& [token, __] : next) vocab.insert(token);
  }
  model.vocabulary.assign(vocab.begin(), vocab.end());
}

void check_order(int n, double alpha) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n-gram order must be at least 2");
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "smoothing constant must be positive");
}

}  // namespace

void check_step_input(const Step& step) {
  const bool is_type = step.event.action == Action::Type;
  if (is_type && !step.input_text) {
    throw Error(ErrorCode::InvalidArgument, "type step " + std::to_string(step.ordinal) + " needs input_text");
  }
  if (!is_type && step.input_text) {
    throw Error(ErrorCode::InvalidArgument,
                "step " + std::to_string(step.ordinal) + " carries input_text but is not a type action");
  }
}

Json to_json(const Step& step) {
  Json j = Json::object();
  j["ordinal"] = step.ordinal;
  j["action"] = to_string(step.event.action);
  j["component"] = step.event.component;
  j["input_text"] = optional_json(step.input_text);
  j["note"] = optional_json(step.note);
  j["manual_override"] = step.manual_override;
  j["state_before"] = optional_json(step.state_before);
  j["state_after"] = step.state_after ? Json(step.state_after->to_text()) : Json(nullptr);
  j["screenshot_full"] = optional_json(step.screenshot_full);
  j["screenshot_crop"] = optional_json(step.screenshot_crop);
  return j;
}

Step step_from_json(const Json& j) {
  Step s;
  s.ordinal = j.at("ordinal").get<int>();
  auto action = parse_action(j.at("action").get<std::string>());
  if (!action) throw Error(ErrorCode::InvalidArgument, "unknown action in step");
  s.event = EventToken{*action, j.at("component").get<std::string>()};
  s.input_text = optional_string(j, "input_text");
  s.note = optional_string(j, "note");
  s.manual_override = j.value("manual_override", false);
  s.state_before = optional_string(j, "state_before");
  if (auto after = optional_string(j, "state_after")) {
    EdgeTarget t;
    if (after->starts_with("CRASH:")) {
      t.crash = after->substr(6);
    } else {
      t.state = *after;
    }
    s.state_after = t;
  }
  s.screenshot_full = optional_string(j, "screenshot_full");
  s.screenshot_crop = optional_string(j, "screenshot_crop");
  return s;
}

std::vector<EventToken> tokens_of(std::span<const Step> steps) {
  std::vector<EventToken> tokens;
  tokens.reserve(steps.size());
  for (const auto& s : steps) tokens.push_back(s.event);
  return tokens;
}

const ActionSuggestions* Suggestion::for_action(Action action) const {
  for (const auto& a : components_by_action) {
    if (a.action == action) return &a;
  }
  return nullptr;
}

bool Suggestion::offers(const EventToken& event) const {
  const auto* list = for_action(event.action);
  if (!list) return false;
  return std::any_of(list->components.begin(), list->components.end(),
                     [&](const auto& c) { return c.record.component_id == event.component; });
}

Json to_json(const Suggestion& s) {
  Json j = Json::object();
  j["inferred_states"] = s.inferred_states;
  Json actions = Json::array();
  for (auto a : s.actions) actions.push_back(to_string(a));
  j["actions"] = std::move(actions);
  Json by_action = Json::array();
  for (const auto& group : s.components_by_action) {
    Json jg = Json::object();
    jg["action"] = to_string(group.action);
    Json components = Json::array();
    for (const auto& c : group.components) {
      Json jc = Json::object();
      jc["component"] = to_json(c.record);
      jc["state"] = c.state;
      jc["crop_screenshot"] = c.crop_screenshot;
      jc["full_screenshot"] = c.full_screenshot;
      jc["score"] = c.score;
      components.push_back(std::move(jc));
    }
    jg["components"] = std::move(components);
    by_action.push_back(std::move(jg));
  }
  j["components_by_action"] = std::move(by_action);
  return j;
}

bool NGramModel::contains(std::string_view token) const {
  return std::binary_search(vocabulary.begin(), vocabulary.end(), token);
}

std::uint64_t NGramModel::context_total(const Context& context) const {
  auto it = counts.find(context);
  if (it == counts.end()) return 0;
  std::uint64_t total = 0;
  for (const auto& [_, n] : it->second) total += n;
  return total;
}

std::uint64_t NGramModel::count(const Context& context, std::string_view next) const {
  auto it = counts.find(context);
  if (it == counts.end()) return 0;
  auto jt = it->second.find(std::string(next));
  return jt == it->second.end() ? 0 : jt->second;
}

NGramModel::Context NGramModel::context_of(std::span<const EventToken> history) const {
  const std::size_t width = static_cast<std::size_t>(order - 1);
  Context context;
  context.reserve(width);
  const std::size_t take = std::min(width, history.size());
  for (std::size_t i = take; i < width; ++i) context.emplace_back(kStartToken);
  for (std::size_t i = history.size() - take; i < history.size(); ++i) context.push_back(history[i].to_text());
  return context;
}

Json to_json(const NGramModel& model) {
  Json j = Json::object();
  j["order"] = model.order;
  j["alpha"] = model.alpha;
  j["vocabulary"] = model.vocabulary;
  Json counts = Json::array();
  for (const auto& [context, next] : model.counts) {
    Json entry = Json::object();
    entry["context"] = context;
    Json jn = Json::object();
    for (const auto& [token, n] : next) jn[token] = n;
    entry["next"] = std::move(jn);
    counts.push_back(std::move(entry));
  }
  j["counts"] = std::move(counts);
  return j;
}

NGramModel ngram_from_json(const Json& j) {
  NGramModel m;
  m.order = j.at("order").get<int>();
  m.alpha = j.at("alpha").get<double>();
  m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  for (const auto& entry : j.at("counts")) {
    auto& next = m.counts[entry.at("context").get<NGramModel::Context>()];
    for (const auto& [token, n] : entry.at("next").items()) next[token] = n.get<std::uint64_t>();
  }
  return m;
}

NGramModel train_ngram(std::span<const EventToken> trace, int n, double alpha,
                       std::span<const EventToken> vocabulary) {
  check_order(n, alpha);
  if (trace.empty()) throw Error(ErrorCode::EmptyTrace, "cannot train an n-gram model on an empty trace");
  NGramModel model;
  model.order = n;
  model.alpha = alpha;
  count_episode(model, trace);
  finish_vocabulary(model, vocabulary);
  return model;
}

NGramModel train_ngram(const EventTrace& episodes, int n, double alpha,
                       std::span<const EventToken> vocabulary) {
  check_order(n, alpha);
  NGramModel model;
  model.order = n;
  model.alpha = alpha;
  bool any = false;
  for (const auto& episode : episodes) {
    if (episode.empty()) continue;
    any = true;
    count_episode(model, episode);
  }
  if (!any) throw Error(ErrorCode::EmptyTrace, "cannot train an n-gram model on an empty trace");
  finish_vocabulary(model, vocabulary);
  return model;
}

double ngram_score(const NGramModel& model, std::span<const EventToken> history,
                   const EventToken& candidate) {
  const auto text = candidate.to_text();
  if (!model.contains(text)) {
    throw Error(ErrorCode::UnknownToken, "token " + text + " is outside the model vocabulary");
  }
  const auto context = model.context_of(history);
  const double numerator = static_cast<double>(model.count(context, text)) + model.alpha;
  const double denominator = static_cast<double>(model.context_total(context)) +
                             model.alpha * static_cast<double>(model.vocabulary.size());
  return numerator / denominator;
}

HistoryMatch match_history(std::span<const EventToken> history, const EventFlowGraph& efg) {
  HistoryMatch match;
  Fingerprint current = efg.cold_start;
  for (const auto& event : history) {
    const auto* edge = efg.find_edge(current, event);
    if (!edge) return match;
    if (edge->to.is_crash()) {
      throw Error(ErrorCode::HistoryHitsCrash, "step " + std::to_string(match.matched + 1) + " (" +
                                                   event.to_text() + ") crashes with " + *edge->to.crash);
    }
    current = *edge->to.state;
    ++match.matched;
  }
  match.terminal = current;
  return match;
}

std::vector<Fingerprint> infer_gui_state(std::span<const EventToken> history, const EventFlowGraph& efg) {
  if (efg.states.empty()) throw Error(ErrorCode::InvalidArgument, "event-flow graph has no states");
  if (history.empty()) return {efg.cold_start};
  const auto match = match_history(history, efg);
  if (match.terminal) return {*match.terminal};

  const auto& anchor = match.matched > 0 ? history[match.matched - 1].component
                                         : history[match.matched].component;
  std::vector<Fingerprint> out;
  for (const auto& [fp, state] : efg.states) {
    if (state.find(anchor)) out.push_back(fp);
  }
  if (out.empty()) {
    for (const auto& [fp, _] : efg.states) out.push_back(fp);
  }
  // std::map iteration already yields fingerprints in sorted order.
  return out;
}

std::vector<Fingerprint> infer_gui_state(std::span<const Step> history, const EventFlowGraph& efg) {
  const auto tokens = tokens_of(history);
  return infer_gui_state(std::span<const EventToken>(tokens), efg);
}

Suggestion suggest_next(std::span<const Step> history, const EventFlowGraph& efg,
                        const NGramModel& ngram, std::span<const ComponentRecord> universe) {
  const auto tokens = tokens_of(history);
  Suggestion s;
  s.inferred_states = infer_gui_state(std::span<const EventToken>(tokens), efg);

  std::map<int, std::vector<SuggestedComponent>> grouped;
  std::set<EventToken> seen;
  for (const auto& fp : s.inferred_states) {
    for (const auto* edge : efg.outgoing(fp)) {
      if (!seen.insert(edge->event).second) continue;
      const auto* record = find_record(universe, edge->event.component);
      if (!record) {
        throw Error(ErrorCode::UnresolvedComponent,
                    "component " + edge->event.component + " missing from the component universe");
      }
      const auto* shot = efg.screenshot(fp, edge->event.component);
      SuggestedComponent entry;
      entry.record = *record;
      entry.state = fp;
      if (shot) {
        entry.crop_screenshot = shot->crop.value_or("");
        entry.full_screenshot = shot->full;
      }
      entry.score = ngram_score(ngram, tokens, edge->event);
      grouped[action_rank(edge->event.action)].push_back(std::move(entry));
    }
  }
  for (auto& [rank, components] : grouped) {
    std::sort(components.begin(), components.end(), [](const auto& a, const auto& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.record.component_id < b.record.component_id;
    });
    const auto action = static_cast<Action>(rank);
    s.actions.push_back(action);
    s.components_by_action.push_back(ActionSuggestions{action, std::move(components)});
  }
  return s;
}

}  // namespace guifusion
