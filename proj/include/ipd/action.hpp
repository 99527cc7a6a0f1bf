#pragma once

#include <cstdint>
#include <string_view>

namespace ipd {

enum class Action : std::uint8_t { Cooperate, Defect };

/// Case-insensitive; surrounding whitespace is ignored. Anything other than
/// "cooperate" or "defect" throws Error(ParseError).
Action parse_action(std::string_view text);

constexpr std::string_view to_string(Action a) noexcept {
  return a == Action::Cooperate ? "cooperate" : "defect";
}

constexpr char to_char(Action a) noexcept { return a == Action::Cooperate ? 'C' : 'D'; }

Action action_from_char(char c);

constexpr Action opposite(Action a) noexcept {
  return a == Action::Cooperate ? Action::Defect : Action::Cooperate;
}

enum class Role : std::uint8_t { A, B };

constexpr Role other(Role r) noexcept { return r == Role::A ? Role::B : Role::A; }

}  // namespace ipd
