#include "ipd/game.hpp"

#include <map>

#include "ipd/errors.hpp"
#include "ipd/templates.hpp"
#include "text_util.hpp"

namespace ipd {

std::string_view to_string(SetupKind kind) {
  switch (kind) {
    case SetupKind::Setup1: return "setup1";
    case SetupKind::Setup2: return "setup2";
    case SetupKind::Setup3: return "setup3";
  }
  return "unknown";
}

SetupKind parse_setup_kind(std::string_view text) {
  const auto t = detail::lower(detail::trim(text));
  if (t == "setup1" || t == "1") return SetupKind::Setup1;
  if (t == "setup2" || t == "2") return SetupKind::Setup2;
  if (t == "setup3" || t == "3") return SetupKind::Setup3;
  throw Error(ErrorKind::ParseError, "unknown setup kind '" + std::string(text) + "'");
}

PayoffMatrix::PayoffMatrix(Payoff cc, Payoff cd, Payoff dc, Payoff dd, bool allow_non_pd)
    : cells_{cc, cd, dc, dd} {
  for (const Payoff& p : cells_) {
    if (p.years_a < 0 || p.years_b < 0) {
      throw Error(ErrorKind::InvalidMatrix, "prison years must be non-negative");
    }
  }
  for (Action a : {Action::Cooperate, Action::Defect}) {
    for (Action b : {Action::Cooperate, Action::Defect}) {
      if (at(a, b).years_a != at(b, a).years_b) {
        throw Error(ErrorKind::InvalidMatrix, "payoff matrix is not symmetric");
      }
    }
  }
  if (!allow_non_pd && !is_prisoners_dilemma()) {
    throw Error(ErrorKind::InvalidMatrix,
                "cost ordering temptation < reward < punishment < sucker violated");
  }
}

PayoffMatrix PayoffMatrix::standard() {
  return PayoffMatrix({1, 1}, {5, 0}, {0, 5}, {3, 3});
}

bool PayoffMatrix::is_prisoners_dilemma() const noexcept {
  return temptation() < reward() && reward() < punishment() && punishment() < sucker();
}

void validate_transcript(const GameTranscript& t) {
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::DataError, t.game_id + ": " + what);
  };
  if (t.rounds_per_game <= 0) fail("rounds_per_game must be positive");
  if (static_cast<int>(t.rounds.size()) > t.rounds_per_game) fail("more rounds than configured");
  if (t.valid && static_cast<int>(t.rounds.size()) != t.rounds_per_game) {
    fail("valid game has " + std::to_string(t.rounds.size()) + " rounds, expected " +
         std::to_string(t.rounds_per_game));
  }
  for (std::size_t i = 0; i < t.rounds.size(); ++i) {
    const RoundRecord& r = t.rounds[i];
    const std::string where = "round " + std::to_string(i + 1) + ": ";
    if (r.round_index != static_cast<int>(i) + 1) fail(where + "round_index not consecutive");
    const Payoff expected = t.matrix.at(r.a_action, r.b_action);
    if (expected.years_a != r.years_a || expected.years_b != r.years_b) {
      fail(where + "stored years disagree with the payoff matrix");
    }
    switch (t.setup_kind) {
      case SetupKind::Setup1:
        if (r.a_message || r.b_message || r.b_declared_intent) fail(where + "setup1 carries messages");
        break;
      case SetupKind::Setup2:
        if (!r.a_message || !r.b_declared_intent) fail(where + "setup2 needs A's message and B's intent");
        if (r.b_message) fail(where + "setup2 has no separate B message");
        break;
      case SetupKind::Setup3:
        if (!r.a_message || !r.b_message) fail(where + "setup3 needs both messages");
        if (r.b_declared_intent != r.b_message) fail(where + "setup3 B intent must equal B message");
        break;
    }
  }
}

Game::Game(GameTranscript header) : transcript_(std::move(header)) {
  transcript_.rounds.clear();
  transcript_.valid = true;
  transcript_.invalid_reason.clear();
  if (transcript_.rounds_per_game <= 0) {
    throw Error(ErrorKind::InvalidArgument, "rounds_per_game must be positive");
  }
}

bool Game::complete() const noexcept {
  return static_cast<int>(transcript_.rounds.size()) >= transcript_.rounds_per_game;
}

void Game::mark_invalid(std::string reason) {
  transcript_.valid = false;
  transcript_.invalid_reason = std::move(reason);
}

const RoundRecord& Game::play_round(const Move& a, const Move& b,
                                    std::optional<Action> b_declared_intent) {
  if (complete()) {
    throw Error(ErrorKind::GameComplete,
                "game already has " + std::to_string(transcript_.rounds_per_game) + " rounds");
  }
  RoundRecord r;
  r.round_index = next_round_index();
  switch (transcript_.setup_kind) {
    case SetupKind::Setup1:
      if (a.message || b.message || b_declared_intent) {
        throw Error(ErrorKind::UnexpectedMessage, "setup1 has no communication");
      }
      break;
    case SetupKind::Setup2:
      if (!a.message) throw Error(ErrorKind::MissingMessage, "setup2 needs A's message");
      if (!b_declared_intent) throw Error(ErrorKind::MissingMessage, "setup2 needs B's declared intent");
      if (b.message) throw Error(ErrorKind::UnexpectedMessage, "setup2 B speaks through its declared intent");
      r.a_message = a.message;
      r.b_declared_intent = b_declared_intent;
      break;
    case SetupKind::Setup3:
      if (!a.message || !b.message) throw Error(ErrorKind::MissingMessage, "setup3 needs both messages");
      if (b_declared_intent && b_declared_intent != b.message) {
        throw Error(ErrorKind::InvalidArgument, "setup3 B intent must equal B message");
      }
      r.a_message = a.message;
      r.b_message = b.message;
      r.b_declared_intent = b.message;
      r.b_reasoning = b.reasoning;
      break;
  }
  r.a_action = a.action;
  r.b_action = b.action;
  const Payoff p = transcript_.matrix.at(a.action, b.action);
  r.years_a = p.years_a;
  r.years_b = p.years_b;
  r.a_reasoning = a.reasoning;
  if (!b.reasoning.empty()) r.b_reasoning = b.reasoning;
  r.a_retries = a.retries;
  r.b_retries = b.retries;
  r.a_raw = a.raw;
  r.b_raw = b.raw;
  transcript_.rounds.push_back(std::move(r));
  return transcript_.rounds.back();
}

std::string years_text(int years) {
  return std::to_string(years) + (years == 1 ? " year" : " years");
}

std::string history_summary(const GameTranscript& transcript, Role perspective,
                            SetupKind setup_kind, const TemplateSet& templates) {
  if (transcript.rounds.empty()) return templates.get("history_first_round");
  const std::string name = "history_" + std::string(to_string(setup_kind));
  const Role them = other(perspective);
  std::string out;
  for (const RoundRecord& r : transcript.rounds) {
    std::map<std::string, std::string> vars{
        {"round", std::to_string(r.round_index)},
        {"my_action", std::string(to_string(r.action_of(perspective)))},
        {"their_action", std::string(to_string(r.action_of(them)))},
        {"my_years", years_text(r.years_of(perspective))},
        {"their_years", years_text(r.years_of(them))},
    };
    if (has_communication(setup_kind)) {
      const auto mine = r.message_of(perspective);
      const auto theirs = r.message_of(them);
      if (!mine || !theirs) {
        throw Error(ErrorKind::MissingMessage,
                    "round " + std::to_string(r.round_index) + " lacks messages for a history summary");
      }
      vars["my_message"] = std::string(to_string(*mine));
      vars["their_message"] = std::string(to_string(*theirs));
    }
    if (!out.empty()) out += '\n';
    out += templates.render(name, vars);
  }
  return out;
}

std::string history_summary(const GameTranscript& transcript, Role perspective, SetupKind setup_kind) {
  return history_summary(transcript, perspective, setup_kind, TemplateSet::builtin());
}

std::string history_summary(const GameTranscript& transcript, Role perspective) {
  return history_summary(transcript, perspective, transcript.setup_kind);
}

}  // namespace ipd
