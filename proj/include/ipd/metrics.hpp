#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ipd/game.hpp"

namespace ipd {

/// events / opportunities for one game. Undefined when there were no
/// opportunities.
struct RateValue {
  std::size_t numerator = 0;
  std::size_t denominator = 0;

  bool defined() const noexcept { return denominator != 0; }
  std::optional<double> value() const noexcept {
    if (!defined()) return std::nullopt;
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }

  bool operator==(const RateValue&) const = default;
};

enum class ForgivenessMode {
  Strict,  // B(t-2)=D, B(t-1)=C
  Loose,   // B(t-1)=C and B defected at some round before t-1
};

// All conditional rates describe Player A and skip round 1, which has no
// previous round to react to.

/// vs AlwaysCooperate: opportunities are rounds t >= 2 with B(t-1) = C,
/// events are A(t) = D.
RateValue troublemaking_rate(const GameTranscript& game);

/// vs AlwaysDefect: opportunities are rounds t >= 2 with B(t-1) = D,
/// events are A(t) = C.
RateValue exploitability_rate(const GameTranscript& game);

/// vs Random: opportunities follow a B defection then cooperation, events are
/// A cooperating in the next round.
RateValue forgiveness_rate(const GameTranscript& game, ForgivenessMode mode = ForgivenessMode::Strict);

/// vs Random: opportunities are rounds t >= 2 with B(t-1) = D, events are
/// A(t) = D.
RateValue retaliatory_rate(const GameTranscript& game);

/// Setups 2 and 3: every round is an opportunity; events are rounds where
/// A's message differs from A's action.
RateValue lying_rate(const GameTranscript& game);

/// Fraction of rounds in which `role` cooperated. Any opponent.
RateValue cooperation_rate(const GameTranscript& game, Role role = Role::A);

/// Sum of both players' years. Lower is better.
long total_score(const GameTranscript& game);

/// A's years minus B's years. Negative means A served less.
long personal_score(const GameTranscript& game);

/// Box-plot summary over the defined values.
struct Summary {
  std::size_t n = 0;          // values supplied
  std::size_t n_defined = 0;  // values that entered the statistics
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Quantile of sorted data by linear interpolation between closest ranks
/// (h = (n-1)q). The median of an even count is the midpoint of the two
/// central values.
double quantile_sorted(std::span<const double> sorted, double q);

/// Throws AllUndefined if no value is defined.
Summary aggregate(std::span<const RateValue> values);
Summary aggregate(std::span<const std::optional<double>> values);

/// Pools events and opportunities across games into a single rate.
RateValue pool(std::span<const RateValue> values);

}  // namespace ipd
