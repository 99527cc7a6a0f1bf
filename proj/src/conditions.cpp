#include "ipd/conditions.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "ipd/errors.hpp"
#include "text_util.hpp"

namespace ipd {

Action parse_action(std::string_view text) {
  const auto t = detail::trim(text);
  if (detail::iequals(t, "cooperate")) return Action::Cooperate;
  if (detail::iequals(t, "defect")) return Action::Defect;
  throw Error(ErrorKind::ParseError, "not an action: '" + std::string(text) + "'");
}

Action action_from_char(char c) {
  switch (c) {
    case 'C': case 'c': return Action::Cooperate;
    case 'D': case 'd': return Action::Defect;
    default: throw Error(ErrorKind::ParseError, std::string("not an action letter: '") + c + "'");
  }
}

namespace {

constexpr std::array<Trait, 5> kTraitOrder = {Trait::Agreeableness, Trait::Conscientiousness,
                                              Trait::Extraversion, Trait::Neuroticism,
                                              Trait::Openness};

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

std::vector<Action> parse_action_letters(std::string_view letters) {
  std::vector<Action> out;
  out.reserve(letters.size());
  for (char c : letters) out.push_back(action_from_char(c));
  return out;
}

}  // namespace

std::string_view to_string(Trait trait) {
  switch (trait) {
    case Trait::Openness: return "openness";
    case Trait::Conscientiousness: return "conscientiousness";
    case Trait::Extraversion: return "extraversion";
    case Trait::Agreeableness: return "agreeableness";
    case Trait::Neuroticism: return "neuroticism";
  }
  return "unknown";
}

Trait parse_trait(std::string_view name) {
  for (Trait t : kTraitOrder) {
    if (detail::iequals(name, to_string(t))) return t;
  }
  throw Error(ErrorKind::ParseError, "unknown trait '" + std::string(name) + "'");
}

char trait_letter(Trait trait) {
  switch (trait) {
    case Trait::Openness: return 'O';
    case Trait::Conscientiousness: return 'C';
    case Trait::Extraversion: return 'E';
    case Trait::Agreeableness: return 'A';
    case Trait::Neuroticism: return 'N';
  }
  return '?';
}

void SteeringSpec::validate() const {
  if (!(coefficient > 0.0) || !std::isfinite(coefficient)) {
    throw Error(ErrorKind::InvalidArgument, "steering coefficient must be positive");
  }
  if (layer_start > layer_end) {
    throw Error(ErrorKind::InvalidArgument, "steering layer range is empty");
  }
  if (layer_end >= 0) {
    throw Error(ErrorKind::InvalidArgument, "steering layers use negative indexing (-1 = last block)");
  }
}

std::string SteeringSpec::label() const {
  return std::string(1, trait_letter(trait)) + (direction == Direction::Plus ? "+" : "-");
}

OpponentSpec OpponentSpec::random(double p) {
  OpponentSpec spec{OpponentKind::Random, p, {}};
  spec.validate();
  return spec;
}

OpponentSpec OpponentSpec::scripted(std::vector<Action> script) {
  OpponentSpec spec{OpponentKind::Scripted, 0.0, std::move(script)};
  spec.validate();
  return spec;
}

void OpponentSpec::validate() const {
  if (kind == OpponentKind::Random) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "random opponent needs p in [0, 1]");
    }
  } else if (p != 0.0) {
    throw Error(ErrorKind::InvalidArgument, "p is only meaningful for a random opponent");
  }
  if (kind == OpponentKind::Scripted) {
    if (script.empty()) throw Error(ErrorKind::InvalidArgument, "scripted opponent needs a sequence");
  } else if (!script.empty()) {
    throw Error(ErrorKind::InvalidArgument, "only a scripted opponent carries a sequence");
  }
}

std::string OpponentSpec::label() const {
  switch (kind) {
    case OpponentKind::AlwaysCooperate: return "AC";
    case OpponentKind::AlwaysDefect: return "AD";
    case OpponentKind::Random: return "RD" + format_p(p);
    case OpponentKind::Altruistic: return "ALT";
    case OpponentKind::Selfish: return "SELF";
    case OpponentKind::Scripted: {
      std::string out = "SCRIPT:";
      for (Action a : script) out += to_char(a);
      return out;
    }
  }
  return "?";
}

std::string label(const Condition& condition) {
  struct Visitor {
    std::string operator()(const Baseline&) const { return "Baseline"; }
    std::string operator()(const SteeringSpec& s) const { return s.label(); }
    std::string operator()(const OpponentSpec& o) const { return o.label(); }
  };
  return std::visit(Visitor{}, condition);
}

Condition parse_condition_label(std::string_view text, const SteeringSpec& steering_defaults) {
  const auto t = detail::trim(text);
  if (detail::iequals(t, "baseline")) return Baseline{};
  if (t == "AC") return OpponentSpec::always_cooperate();
  if (t == "AD") return OpponentSpec::always_defect();
  if (t == "ALT") return OpponentSpec::altruistic();
  if (t == "SELF") return OpponentSpec::selfish();
  if (t.starts_with("SCRIPT:")) return OpponentSpec::scripted(parse_action_letters(t.substr(7)));
  if (t.starts_with("RD") && t.size() > 2) {
    const std::string digits(t.substr(2));
    char* end = nullptr;
    const double p = std::strtod(digits.c_str(), &end);
    if (end == digits.c_str() + digits.size()) return OpponentSpec::random(p);
  }
  if (t.size() == 2 && (t[1] == '+' || t[1] == '-')) {
    for (Trait trait : kTraitOrder) {
      if (trait_letter(trait) == t[0]) {
        SteeringSpec spec = steering_defaults;
        spec.trait = trait;
        spec.direction = t[1] == '+' ? Direction::Plus : Direction::Minus;
        spec.validate();
        return spec;
      }
    }
  }
  throw Error(ErrorKind::ParseError, "unknown condition label '" + std::string(text) + "'");
}

std::vector<Condition> big_five_grid(const SteeringSpec& steering_defaults) {
  std::vector<Condition> grid;
  grid.emplace_back(Baseline{});
  for (Trait trait : kTraitOrder) {
    for (Direction d : {Direction::Plus, Direction::Minus}) {
      SteeringSpec spec = steering_defaults;
      spec.trait = trait;
      spec.direction = d;
      grid.emplace_back(spec);
    }
  }
  return grid;
}

std::pair<int, std::string> canonical_order_key(std::string_view label) {
  const std::string l(label);
  if (l == "Baseline") return {0, ""};
  if (l.size() == 2 && (l[1] == '+' || l[1] == '-')) {
    for (std::size_t i = 0; i < kTraitOrder.size(); ++i) {
      if (trait_letter(kTraitOrder[i]) == l[0]) {
        return {1 + static_cast<int>(i) * 2 + (l[1] == '-' ? 1 : 0), ""};
      }
    }
  }
  if (l == "AC") return {20, ""};
  if (l == "AD") return {21, ""};
  if (l == "RD") return {22, ""};
  if (l.starts_with("RD")) {
    // Numeric order on p; the text sorts equal-width decimals correctly.
    char* end = nullptr;
    const double p = std::strtod(l.c_str() + 2, &end);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%012.6f", p);
    return {23, buf};
  }
  if (l == "ALT") return {24, ""};
  if (l == "SELF") return {25, ""};
  return {30, l};
}

}  // namespace ipd
