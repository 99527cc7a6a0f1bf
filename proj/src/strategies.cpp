#include "ipd/strategies.hpp"

#include "ipd/errors.hpp"
#include "text_util.hpp"

namespace ipd {

Action rule_decide(const OpponentSpec& spec, StrategyState& state,
                   std::span<const RoundRecord> /*history*/) {
  switch (spec.kind) {
    case OpponentKind::AlwaysCooperate:
      return Action::Cooperate;
    case OpponentKind::AlwaysDefect:
      return Action::Defect;
    case OpponentKind::Random:
      return state.rng().bernoulli(spec.p) ? Action::Defect : Action::Cooperate;
    case OpponentKind::Scripted:
      if (state.script_position >= spec.script.size()) {
        throw Error(ErrorKind::ScriptExhausted,
                    "script of length " + std::to_string(spec.script.size()) + " exhausted");
      }
      return spec.script[state.script_position++];
    case OpponentKind::Altruistic:
    case OpponentKind::Selfish:
      break;
  }
  throw Error(ErrorKind::WrongOpponent, spec.label() + " is not a setup1 rule");
}

Action declare_intent(StrategyState& state) {
  const Action intent = state.rng().coin();
  state.pending_intent = intent;
  return intent;
}

Action communication_adjust(const OpponentSpec& spec, Action intent, Action heard_from_a) {
  switch (spec.kind) {
    case OpponentKind::Altruistic: return altruistic_adjust(intent, heard_from_a);
    case OpponentKind::Selfish: return selfish_adjust(intent, heard_from_a);
    default: break;
  }
  throw Error(ErrorKind::WrongOpponent, spec.label() + " does not react to messages");
}

namespace {

std::string letters(const std::vector<Action>& actions) {
  std::string out;
  for (Action a : actions) out += to_char(a);
  return out;
}

std::vector<Action> from_letters(std::string_view text) {
  std::vector<Action> out;
  for (char c : text) out.push_back(action_from_char(c));
  return out;
}

}  // namespace

std::string ScriptedPolicy::label() const {
  std::string out;
  switch (kind) {
    case ScriptedKind::AlwaysCooperate: out = "all_c"; break;
    case ScriptedKind::AlwaysDefect: out = "all_d"; break;
    case ScriptedKind::TitForTat: out = "tft"; break;
    case ScriptedKind::Sequence: out = "seq:" + letters(actions); break;
  }
  switch (messages) {
    case MessagePolicy::Truthful: break;
    case MessagePolicy::Inverted: out += "/inverted"; break;
    case MessagePolicy::AlwaysCooperate: out += "/say_c"; break;
    case MessagePolicy::AlwaysDefect: out += "/say_d"; break;
    case MessagePolicy::Sequence: out += "/say:" + letters(message_script); break;
  }
  return out;
}

ScriptedPolicy ScriptedPolicy::parse(std::string_view text) {
  const auto t = detail::trim(text);
  const auto slash = t.find('/');
  const auto head = t.substr(0, slash);
  ScriptedPolicy policy;
  if (head == "all_c") {
    policy.kind = ScriptedKind::AlwaysCooperate;
  } else if (head == "all_d") {
    policy.kind = ScriptedKind::AlwaysDefect;
  } else if (head == "tft") {
    policy.kind = ScriptedKind::TitForTat;
  } else if (head.starts_with("seq:") && head.size() > 4) {
    policy.kind = ScriptedKind::Sequence;
    policy.actions = from_letters(head.substr(4));
  } else {
    throw Error(ErrorKind::ParseError, "unknown scripted policy '" + std::string(text) + "'");
  }
  if (slash != std::string_view::npos) {
    const auto tail = t.substr(slash + 1);
    if (tail == "truthful") {
      policy.messages = MessagePolicy::Truthful;
    } else if (tail == "inverted") {
      policy.messages = MessagePolicy::Inverted;
    } else if (tail == "say_c") {
      policy.messages = MessagePolicy::AlwaysCooperate;
    } else if (tail == "say_d") {
      policy.messages = MessagePolicy::AlwaysDefect;
    } else if (tail.starts_with("say:") && tail.size() > 4) {
      policy.messages = MessagePolicy::Sequence;
      policy.message_script = from_letters(tail.substr(4));
    } else {
      throw Error(ErrorKind::ParseError, "unknown message policy '" + std::string(tail) + "'");
    }
  }
  return policy;
}

Action scripted_action(const ScriptedPolicy& policy, Role self, std::span<const RoundRecord> history) {
  switch (policy.kind) {
    case ScriptedKind::AlwaysCooperate:
      return Action::Cooperate;
    case ScriptedKind::AlwaysDefect:
      return Action::Defect;
    case ScriptedKind::TitForTat:
      return history.empty() ? Action::Cooperate : history.back().action_of(other(self));
    case ScriptedKind::Sequence:
      if (history.size() >= policy.actions.size()) {
        throw Error(ErrorKind::ScriptExhausted, "scripted sequence " + policy.label() + " exhausted");
      }
      return policy.actions[history.size()];
  }
  return Action::Cooperate;
}

Action scripted_message(const ScriptedPolicy& policy, std::span<const RoundRecord> history,
                        Action planned_action) {
  switch (policy.messages) {
    case MessagePolicy::Truthful: return planned_action;
    case MessagePolicy::Inverted: return opposite(planned_action);
    case MessagePolicy::AlwaysCooperate: return Action::Cooperate;
    case MessagePolicy::AlwaysDefect: return Action::Defect;
    case MessagePolicy::Sequence:
      if (history.size() >= policy.message_script.size()) {
        throw Error(ErrorKind::ScriptExhausted, "message script " + policy.label() + " exhausted");
      }
      return policy.message_script[history.size()];
  }
  return planned_action;
}

}  // namespace ipd
