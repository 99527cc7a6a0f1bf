#include "ipd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ipd/errors.hpp"

namespace ipd {

namespace {

void require_opponent(const GameTranscript& game, OpponentKind kind, std::string_view metric) {
  const auto* spec = std::get_if<OpponentSpec>(&game.condition_b);
  if (spec == nullptr || spec->kind != kind) {
    throw Error(ErrorKind::WrongOpponent,
                std::string(metric) + " is not measured against " + label(game.condition_b));
  }
}

// Rounds t >= 2 (index i >= 1) where B's previous action was `trigger`;
// events are A answering with `response`.
RateValue react_to_previous(const GameTranscript& game, Action trigger, Action response) {
  RateValue rate;
  const auto& rounds = game.rounds;
  for (std::size_t i = 1; i < rounds.size(); ++i) {
    if (rounds[i - 1].b_action != trigger) continue;
    ++rate.denominator;
    if (rounds[i].a_action == response) ++rate.numerator;
  }
  return rate;
}

}  // namespace

RateValue troublemaking_rate(const GameTranscript& game) {
  require_opponent(game, OpponentKind::AlwaysCooperate, "troublemaking");
  return react_to_previous(game, Action::Cooperate, Action::Defect);
}

RateValue exploitability_rate(const GameTranscript& game) {
  require_opponent(game, OpponentKind::AlwaysDefect, "exploitability");
  return react_to_previous(game, Action::Defect, Action::Cooperate);
}

RateValue retaliatory_rate(const GameTranscript& game) {
  require_opponent(game, OpponentKind::Random, "retaliatory");
  return react_to_previous(game, Action::Defect, Action::Defect);
}

RateValue forgiveness_rate(const GameTranscript& game, ForgivenessMode mode) {
  require_opponent(game, OpponentKind::Random, "forgiveness");
  RateValue rate;
  const auto& rounds = game.rounds;
  bool defected_earlier = false;  // B defected somewhere before round i-1
  for (std::size_t i = 1; i < rounds.size(); ++i) {
    bool opportunity = false;
    if (rounds[i - 1].b_action == Action::Cooperate) {
      if (mode == ForgivenessMode::Strict) {
        opportunity = i >= 2 && rounds[i - 2].b_action == Action::Defect;
      } else {
        opportunity = defected_earlier;
      }
    }
    if (rounds[i - 1].b_action == Action::Defect) defected_earlier = true;
    if (!opportunity) continue;
    ++rate.denominator;
    if (rounds[i].a_action == Action::Cooperate) ++rate.numerator;
  }
  return rate;
}

RateValue lying_rate(const GameTranscript& game) {
  RateValue rate;
  for (const RoundRecord& r : game.rounds) {
    if (!r.a_message) {
      throw Error(ErrorKind::MissingMessages,
                  game.game_id + " round " + std::to_string(r.round_index) + " has no message from A");
    }
    ++rate.denominator;
    if (*r.a_message != r.a_action) ++rate.numerator;
  }
  return rate;
}

RateValue cooperation_rate(const GameTranscript& game, Role role) {
  RateValue rate;
  for (const RoundRecord& r : game.rounds) {
    ++rate.denominator;
    if (r.action_of(role) == Action::Cooperate) ++rate.numerator;
  }
  return rate;
}

long total_score(const GameTranscript& game) {
  if (!game.complete()) throw Error(ErrorKind::IncompleteGame, game.game_id + " is not a complete game");
  long sum = 0;
  for (const RoundRecord& r : game.rounds) sum += r.years_a + r.years_b;
  return sum;
}

long personal_score(const GameTranscript& game) {
  if (!game.complete()) throw Error(ErrorKind::IncompleteGame, game.game_id + " is not a complete game");
  long diff = 0;
  for (const RoundRecord& r : game.rounds) diff += r.years_a - r.years_b;
  return diff;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorKind::AllUndefined, "quantile of an empty set");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

Summary aggregate(std::span<const std::optional<double>> values) {
  std::vector<double> defined;
  for (const auto& v : values) {
    if (v) defined.push_back(*v);
  }
  if (defined.empty()) throw Error(ErrorKind::AllUndefined, "no defined value to aggregate");
  std::sort(defined.begin(), defined.end());
  Summary s;
  s.n = values.size();
  s.n_defined = defined.size();
  s.median = quantile_sorted(defined, 0.5);
  s.q1 = quantile_sorted(defined, 0.25);
  s.q3 = quantile_sorted(defined, 0.75);
  s.min = defined.front();
  s.max = defined.back();
  s.mean = std::accumulate(defined.begin(), defined.end(), 0.0) / static_cast<double>(defined.size());
  return s;
}

Summary aggregate(std::span<const RateValue> values) {
  std::vector<std::optional<double>> v;
  v.reserve(values.size());
  for (const RateValue& r : values) v.push_back(r.value());
  return aggregate(v);
}

RateValue pool(std::span<const RateValue> values) {
  RateValue out;
  for (const RateValue& r : values) {
    out.numerator += r.numerator;
    out.denominator += r.denominator;
  }
  return out;
}

}  // namespace ipd
