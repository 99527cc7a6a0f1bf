#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipd/conditions.hpp"
#include "ipd/game.hpp"
#include "ipd/rng.hpp"

namespace ipd {

/// Per-game state of a rule-based Player B.
class StrategyState {
 public:
  /// The stream is keyed off the game seed; equal seeds give equal draws.
  explicit StrategyState(std::uint64_t game_seed)
      : rng_(derive_stream_seed(game_seed, stream_tag::kOpponentRule)) {}

  RandomStream& rng() noexcept { return rng_; }

  std::optional<Action> pending_intent;
  std::size_t script_position = 0;

 private:
  RandomStream rng_;
};

/// Setup 1 kinds only (AC, AD, Random, Scripted). Random draws one Bernoulli(p)
/// per call; Scripted returns the next element and throws ScriptExhausted
/// past the end. Other kinds throw WrongOpponent.
Action rule_decide(const OpponentSpec& spec, StrategyState& state,
                   std::span<const RoundRecord> history);

/// Fair coin from the state's stream, remembered as `pending_intent`.
Action declare_intent(StrategyState& state);

/// Switch to cooperate when intending to defect but A says cooperate;
/// switch to defect when intending to cooperate but A says defect.
constexpr Action altruistic_adjust(Action intent, Action heard_from_a) noexcept {
  if (intent == Action::Defect && heard_from_a == Action::Cooperate) return Action::Cooperate;
  if (intent == Action::Cooperate && heard_from_a == Action::Defect) return Action::Defect;
  return intent;
}

/// Switch to defect whenever intending to cooperate, whatever A says. An
/// intent to defect is kept.
constexpr Action selfish_adjust(Action intent, Action heard_from_a) noexcept {
  if (intent == Action::Cooperate && heard_from_a == Action::Cooperate) return Action::Defect;
  if (intent == Action::Cooperate && heard_from_a == Action::Defect) return Action::Defect;
  return intent;
}

/// Dispatches on Altruistic / Selfish; other kinds throw WrongOpponent.
Action communication_adjust(const OpponentSpec& spec, Action intent, Action heard_from_a);

// Scripted policies. These stand in for Player A (or either player in
// Setup 3) when a test needs a known, deterministic behaviour.

enum class ScriptedKind { AlwaysCooperate, AlwaysDefect, TitForTat, Sequence };
enum class MessagePolicy { Truthful, Inverted, AlwaysCooperate, AlwaysDefect, Sequence };

struct ScriptedPolicy {
  ScriptedKind kind = ScriptedKind::AlwaysCooperate;
  std::vector<Action> actions;  // Sequence
  MessagePolicy messages = MessagePolicy::Truthful;
  std::vector<Action> message_script;  // MessagePolicy::Sequence

  static ScriptedPolicy always_cooperate() { return {ScriptedKind::AlwaysCooperate, {}, {}, {}}; }
  static ScriptedPolicy always_defect() { return {ScriptedKind::AlwaysDefect, {}, {}, {}}; }
  static ScriptedPolicy tit_for_tat() { return {ScriptedKind::TitForTat, {}, {}, {}}; }
  static ScriptedPolicy sequence(std::vector<Action> actions) {
    return {ScriptedKind::Sequence, std::move(actions), {}, {}};
  }

  std::string label() const;
  /// Accepts the label() forms: "all_c", "all_d", "tft", "seq:CCD..." with an
  /// optional "/truthful", "/inverted", "/say_c", "/say_d", "/say:CDC..." suffix.
  static ScriptedPolicy parse(std::string_view text);

  bool operator==(const ScriptedPolicy&) const = default;
};

/// The scripted player's action for the next round. Tit-for-Tat cooperates
/// first, then copies the opponent's previous action.
Action scripted_action(const ScriptedPolicy& policy, Role self, std::span<const RoundRecord> history);

/// What the scripted player announces, given the action it is about to take.
Action scripted_message(const ScriptedPolicy& policy, std::span<const RoundRecord> history,
                        Action planned_action);

}  // namespace ipd
