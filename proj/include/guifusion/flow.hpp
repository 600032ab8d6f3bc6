#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "guifusion/ripper.hpp"

namespace guifusion {

/// One reproduction step: the {action, component} tuple plus what the
/// reporter typed and noted, and the states it was resolved against.
struct Step {
  int ordinal = 1;
  EventToken event;
  std::optional<std::string> input_text;  // present iff action is type
  std::optional<std::string> note;
  bool manual_override = false;           // entered without being suggested
  std::optional<Fingerprint> state_before;
  std::optional<EdgeTarget> state_after;
  std::optional<std::string> screenshot_full;
  std::optional<std::string> screenshot_crop;

  friend bool operator==(const Step&, const Step&) = default;
};

/// Throws Error(InvalidArgument) when input_text presence disagrees with the
/// action.
void check_step_input(const Step& step);

Json to_json(const Step& step);
Step step_from_json(const Json& json);

std::vector<EventToken> tokens_of(std::span<const Step> steps);

struct SuggestedComponent {
  ComponentRecord record;
  Fingerprint state;           // inferred state the entry was taken from
  std::string crop_screenshot; // component-specific screenshot id
  std::string full_screenshot; // contextual full-size screenshot id
  double score = 0.0;

  friend bool operator==(const SuggestedComponent&, const SuggestedComponent&) = default;
};

struct ActionSuggestions {
  Action action = Action::Tap;
  std::vector<SuggestedComponent> components;

  friend bool operator==(const ActionSuggestions&, const ActionSuggestions&) = default;
};

struct Suggestion {
  std::vector<Fingerprint> inferred_states;
  std::vector<Action> actions;
  std::vector<ActionSuggestions> components_by_action;  // same order as actions

  const ActionSuggestions* for_action(Action action) const;
  bool offers(const EventToken& event) const;

  friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

Json to_json(const Suggestion& suggestion);

inline constexpr std::string_view kStartToken = "START";

/// Laplace-smoothed n-gram model over event tokens (text form). The START
/// sentinel only ever appears in contexts and is not part of |V|.
class NGramModel {
 public:
  using Context = std::vector<std::string>;

  int order = 3;
  double alpha = 1.0;
  std::vector<std::string> vocabulary;  // sorted token texts, START excluded
  std::map<Context, std::map<std::string, std::uint64_t>> counts;

  bool contains(std::string_view token) const;
  std::uint64_t context_total(const Context& context) const;
  std::uint64_t count(const Context& context, std::string_view next) const;
  /// Last order-1 tokens of the history, left-padded with START.
  Context context_of(std::span<const EventToken> history) const;

  friend bool operator==(const NGramModel&, const NGramModel&) = default;
};

Json to_json(const NGramModel& model);
NGramModel ngram_from_json(const Json& json);

/// Trains over one chronological trace; `vocabulary` adds tokens that may be
/// absent from the trace (typically every EFG edge token).
NGramModel train_ngram(std::span<const EventToken> trace, int n = 3, double alpha = 1.0,
                       std::span<const EventToken> vocabulary = {});
/// Same, over several episodes each starting from a cold start.
NGramModel train_ngram(const EventTrace& episodes, int n = 3, double alpha = 1.0,
                       std::span<const EventToken> vocabulary = {});

double ngram_score(const NGramModel& model, std::span<const EventToken> history,
                   const EventToken& candidate);

/// Result of walking a step history along the EFG from cold start.
struct HistoryMatch {
  std::size_t matched = 0;                // steps matched before divergence
  std::optional<Fingerprint> terminal;    // set iff every step matched
};

/// Throws Error(HistoryHitsCrash) when a matched step follows a crash edge.
HistoryMatch match_history(std::span<const EventToken> history, const EventFlowGraph& efg);

std::vector<Fingerprint> infer_gui_state(std::span<const Step> history, const EventFlowGraph& efg);
std::vector<Fingerprint> infer_gui_state(std::span<const EventToken> history,
                                         const EventFlowGraph& efg);

Suggestion suggest_next(std::span<const Step> history, const EventFlowGraph& efg,
                        const NGramModel& ngram, std::span<const ComponentRecord> universe);

}  // namespace guifusion
