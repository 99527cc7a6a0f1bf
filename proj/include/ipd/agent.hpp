#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ipd/game.hpp"
#include "ipd/strategies.hpp"

namespace ipd {

/// Which answer a turn asks for.
enum class Phase {
  Act,            // Setup 1: action only
  MessageAndAct,  // Setup 2, Player A: message and action in one reply
  Message,        // Setup 3, first half of a round
  ActAfterMessages,  // Setup 3, second half: both messages are known
};

constexpr bool phase_wants_message(Phase p) noexcept {
  return p == Phase::MessageAndAct || p == Phase::Message;
}
constexpr bool phase_wants_action(Phase p) noexcept { return p != Phase::Message; }

struct TurnContext {
  SetupKind setup = SetupKind::Setup1;
  Role role = Role::A;
  Phase phase = Phase::Act;
  const GameTranscript* transcript = nullptr;  // rounds played so far
  int round_index = 1;
  std::optional<Action> opponent_declaration;  // what the other player said this round
  std::optional<Action> own_message;           // Setup 3 action phase
  std::uint64_t decode_seed = 0;
};

struct TurnReply {
  std::optional<Action> action;
  std::optional<Action> message;
  std::string reasoning;
  int retries = 0;
  std::vector<std::string> raw;
};

/// A player that needs to be asked (scripted or LLM-backed). Rule-based
/// opponents are driven directly by the tournament.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual TurnReply take_turn(const TurnContext& context) = 0;
};

class ScriptedAgent final : public Agent {
 public:
  explicit ScriptedAgent(ScriptedPolicy policy) : policy_(std::move(policy)) {}
  TurnReply take_turn(const TurnContext& context) override;

 private:
  ScriptedPolicy policy_;
};

}  // namespace ipd
