#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ipd/action.hpp"

namespace ipd {

enum class Trait { Openness, Conscientiousness, Extraversion, Agreeableness, Neuroticism };
enum class Direction { Plus, Minus };

std::string_view to_string(Trait trait);  // lowercase wire name, e.g. "agreeableness"
Trait parse_trait(std::string_view name);
char trait_letter(Trait trait);           // 'A', 'C', 'E', 'N', 'O'

/// Personality steering applied to an LLM agent. Layers use negative indexing
/// counted from the final transformer block (-1 = last).
struct SteeringSpec {
  Trait trait = Trait::Agreeableness;
  Direction direction = Direction::Plus;
  double coefficient = 3.5;
  int layer_start = -20;
  int layer_end = -5;

  void validate() const;
  int sign() const { return direction == Direction::Plus ? 1 : -1; }
  std::string label() const;  // "A+", "N-", ...

  bool operator==(const SteeringSpec&) const = default;
};

/// Unsteered LLM (or whatever agent the binding maps "Baseline" to).
struct Baseline {
  bool operator==(const Baseline&) const = default;
};

enum class OpponentKind { AlwaysCooperate, AlwaysDefect, Random, Altruistic, Selfish, Scripted };

/// Rule-based Player B.
struct OpponentSpec {
  OpponentKind kind = OpponentKind::AlwaysCooperate;
  double p = 0.0;              // defection probability, Random only
  std::vector<Action> script;  // Scripted only

  static OpponentSpec always_cooperate() { return {OpponentKind::AlwaysCooperate, 0.0, {}}; }
  static OpponentSpec always_defect() { return {OpponentKind::AlwaysDefect, 0.0, {}}; }
  static OpponentSpec random(double p);
  static OpponentSpec altruistic() { return {OpponentKind::Altruistic, 0.0, {}}; }
  static OpponentSpec selfish() { return {OpponentKind::Selfish, 0.0, {}}; }
  static OpponentSpec scripted(std::vector<Action> script);

  void validate() const;
  std::string label() const;  // "AC", "AD", "RD0.3", "ALT", "SELF", "SCRIPT:CDD"

  bool operator==(const OpponentSpec&) const = default;
};

inline constexpr double kDefaultRandomSweep[] = {0.3, 0.5, 0.7};

using Condition = std::variant<Baseline, SteeringSpec, OpponentSpec>;

std::string label(const Condition& condition);

/// Inverse of label(). Steering labels take the given defaults for
/// coefficient and layer range.
Condition parse_condition_label(std::string_view text, const SteeringSpec& steering_defaults = {});

/// Baseline, A+, A-, C+, C-, E+, E-, N+, N-, O+, O-.
std::vector<Condition> big_five_grid(const SteeringSpec& steering_defaults = {});

/// Sort key used by every report so rows and heatmap axes come out in the
/// same order: Baseline, then traits A, C, E, N, O (+ before -), then rule
/// opponents AC, AD, RD by p, ALT, SELF, then scripted.
std::pair<int, std::string> canonical_order_key(std::string_view label);

}  // namespace ipd
