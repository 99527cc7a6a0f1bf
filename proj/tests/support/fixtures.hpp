#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ipd/game.hpp"
#include "ipd/rng.hpp"

namespace ipd::testing {

inline std::vector<Action> acts(std::string_view letters) {
  std::vector<Action> out;
  for (char c : letters) out.push_back(action_from_char(c));
  return out;
}

/// A complete game built straight from action strings, payoffs looked up
/// from the standard matrix. `a_messages` is required for Setups 2 and 3.
inline GameTranscript make_game(SetupKind setup, Condition condition_b, std::string_view a_actions,
                                std::string_view b_actions, std::string_view a_messages = {},
                                std::string_view b_messages = {}) {
  GameTranscript t;
  t.game_id = "fixture";
  t.setup_kind = setup;
  t.condition_b = std::move(condition_b);
  t.rounds_per_game = static_cast<int>(a_actions.size());
  const PayoffMatrix m = PayoffMatrix::standard();
  for (std::size_t i = 0; i < a_actions.size(); ++i) {
    RoundRecord r;
    r.round_index = static_cast<int>(i) + 1;
    r.a_action = action_from_char(a_actions[i]);
    r.b_action = action_from_char(b_actions[i]);
    const Payoff p = m.at(r.a_action, r.b_action);
    r.years_a = p.years_a;
    r.years_b = p.years_b;
    if (!a_messages.empty()) r.a_message = action_from_char(a_messages[i]);
    if (setup == SetupKind::Setup2) r.b_declared_intent = Action::Cooperate;
    if (setup == SetupKind::Setup3) {
      r.b_message = b_messages.empty() ? r.b_action : action_from_char(b_messages[i]);
      r.b_declared_intent = r.b_message;
    }
    t.rounds.push_back(r);
  }
  return t;
}

inline std::string random_letters(RandomStream& rng, std::size_t n, double p_defect) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += rng.bernoulli(p_defect) ? 'D' : 'C';
  return s;
}

}  // namespace ipd::testing
