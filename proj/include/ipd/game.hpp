#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ipd/action.hpp"
#include "ipd/conditions.hpp"

namespace ipd {

class TemplateSet;

enum class SetupKind : std::uint8_t { Setup1, Setup2, Setup3 };

std::string_view to_string(SetupKind kind);  // "setup1", ...
SetupKind parse_setup_kind(std::string_view text);

/// Setups 2 and 3 exchange messages before every round.
constexpr bool has_communication(SetupKind kind) noexcept { return kind != SetupKind::Setup1; }

/// Prison years served by each player for one round. Lower is better.
struct Payoff {
  int years_a = 0;
  int years_b = 0;
  bool operator==(const Payoff&) const = default;
};

/// Immutable 2x2 outcome table denominated in prison years.
///
/// Construction enforces: every cell non-negative, and the table symmetric
/// (entry(a,b).years_a == entry(b,a).years_b). The Prisoner's Dilemma cost
/// ordering  temptation < reward < punishment < sucker  is enforced unless
/// `allow_non_pd` is set.
class PayoffMatrix {
 public:
  PayoffMatrix(Payoff cc, Payoff cd, Payoff dc, Payoff dd, bool allow_non_pd = false);

  /// (C,C)=(1,1), (C,D)=(5,0), (D,C)=(0,5), (D,D)=(3,3).
  static PayoffMatrix standard();

  Payoff at(Action a, Action b) const noexcept { return cells_[index(a, b)]; }

  bool is_prisoners_dilemma() const noexcept;

  // Row player's view of the four outcomes.
  int reward() const noexcept { return at(Action::Cooperate, Action::Cooperate).years_a; }
  int sucker() const noexcept { return at(Action::Cooperate, Action::Defect).years_a; }
  int temptation() const noexcept { return at(Action::Defect, Action::Cooperate).years_a; }
  int punishment() const noexcept { return at(Action::Defect, Action::Defect).years_a; }

  bool operator==(const PayoffMatrix&) const = default;

 private:
  static constexpr std::size_t index(Action a, Action b) noexcept {
    return static_cast<std::size_t>(a) * 2 + static_cast<std::size_t>(b);
  }
  std::array<Payoff, 4> cells_;
};

inline Payoff payoff(const PayoffMatrix& matrix, Action a, Action b) noexcept {
  return matrix.at(a, b);
}

struct RoundRecord {
  int round_index = 0;  // 1-based
  std::optional<Action> b_declared_intent;
  std::optional<Action> a_message;
  std::optional<Action> b_message;
  Action a_action = Action::Cooperate;
  Action b_action = Action::Cooperate;
  int years_a = 0;
  int years_b = 0;
  std::string a_reasoning;
  std::optional<std::string> b_reasoning;
  // Audit trail for LLM-backed players: verbatim output of every attempt.
  int a_retries = 0;
  int b_retries = 0;
  std::vector<std::string> a_raw;
  std::vector<std::string> b_raw;

  Action action_of(Role r) const noexcept { return r == Role::A ? a_action : b_action; }
  int years_of(Role r) const noexcept { return r == Role::A ? years_a : years_b; }
  /// What `r` told the other player this round, if anything. For B in
  /// Setup 2 that is its (random) declared intent.
  std::optional<Action> message_of(Role r) const noexcept {
    if (r == Role::A) return a_message;
    return b_message ? b_message : b_declared_intent;
  }

  bool operator==(const RoundRecord&) const = default;
};

struct GameTranscript {
  std::string game_id;
  SetupKind setup_kind = SetupKind::Setup1;
  Condition condition_a = Baseline{};
  Condition condition_b = Baseline{};
  std::uint64_t seed = 0;
  std::size_t cell_index = 0;
  std::size_t iteration_index = 0;
  int rounds_per_game = 10;
  PayoffMatrix matrix = PayoffMatrix::standard();
  std::vector<RoundRecord> rounds;
  bool valid = true;
  std::string invalid_reason;

  bool complete() const noexcept {
    return valid && static_cast<int>(rounds.size()) == rounds_per_game;
  }

  bool operator==(const GameTranscript&) const = default;
};

/// Throws Error(DataError) naming the first violated invariant: payoff
/// re-lookup, consecutive 1-based indices, round count (complete valid games
/// only), and communication fields matching the setup kind.
void validate_transcript(const GameTranscript& transcript);

/// One player's contribution to a round.
struct Move {
  Action action = Action::Cooperate;
  std::optional<Action> message;
  std::string reasoning;
  int retries = 0;
  std::vector<std::string> raw;
};

/// Single-owner state of one game in progress.
class Game {
 public:
  /// `header` supplies everything but the rounds; any rounds it carries are
  /// discarded.
  explicit Game(GameTranscript header);

  /// Appends the next round. Setup 2 requires `b_declared_intent` and A's
  /// message; Setup 3 requires both messages (B's message doubles as its
  /// declared intent). Setup 1 rejects messages.
  const RoundRecord& play_round(const Move& a, const Move& b,
                                std::optional<Action> b_declared_intent = std::nullopt);

  bool complete() const noexcept;
  int next_round_index() const noexcept { return static_cast<int>(transcript_.rounds.size()) + 1; }

  const GameTranscript& transcript() const noexcept { return transcript_; }
  void mark_invalid(std::string reason);
  GameTranscript release() && { return std::move(transcript_); }

 private:
  GameTranscript transcript_;
};

/// Per-round text summary of the game so far from `perspective`'s point of
/// view, one line per round. An empty history gives the first-round marker.
std::string history_summary(const GameTranscript& transcript, Role perspective,
                            SetupKind setup_kind, const TemplateSet& templates);
std::string history_summary(const GameTranscript& transcript, Role perspective,
                            SetupKind setup_kind);
std::string history_summary(const GameTranscript& transcript, Role perspective);

/// "1 year", "0 years", "5 years".
std::string years_text(int years);

}  // namespace ipd
