#include "ipd/tournament.hpp"

#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ipd/errors.hpp"
#include "ipd/reporting.hpp"
#include "ipd/rng.hpp"
#include "ipd/strategies.hpp"

namespace ipd {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Plan

namespace {

bool is_agent_condition(const Condition& c) {
  return std::holds_alternative<Baseline>(c) || std::holds_alternative<SteeringSpec>(c);
}

void check_opponent(const Condition& c, SetupKind setup) {
  const auto* o = std::get_if<OpponentSpec>(&c);
  const std::string where = std::string(to_string(setup)) + " opponent " + label(c);
  if (setup == SetupKind::Setup3) {
    if (!is_agent_condition(c)) throw Error(ErrorKind::InvalidArgument, where + " must be Baseline or steering");
    return;
  }
  if (o == nullptr) throw Error(ErrorKind::InvalidArgument, where + " must be a rule-based opponent");
  o->validate();
  const bool ok = setup == SetupKind::Setup1
                      ? (o->kind == OpponentKind::AlwaysCooperate || o->kind == OpponentKind::AlwaysDefect ||
                         o->kind == OpponentKind::Random || o->kind == OpponentKind::Scripted)
                      : (o->kind == OpponentKind::Altruistic || o->kind == OpponentKind::Selfish);
  if (!ok) throw Error(ErrorKind::InvalidArgument, where + " does not belong to this setup");
}

json payoff_json(const PayoffMatrix& m) {
  const auto cell = [&](Action a, Action b) { return json::array({m.at(a, b).years_a, m.at(a, b).years_b}); };
  return {{"cc", cell(Action::Cooperate, Action::Cooperate)},
          {"cd", cell(Action::Cooperate, Action::Defect)},
          {"dc", cell(Action::Defect, Action::Cooperate)},
          {"dd", cell(Action::Defect, Action::Defect)}};
}

std::vector<Condition> conditions_from_json(const json& j, const SteeringSpec& defaults) {
  if (j.is_string()) {
    if (j.get<std::string>() == "big_five") return big_five_grid(defaults);
    throw Error(ErrorKind::ParseError, "condition list must be an array or \"big_five\"");
  }
  std::vector<Condition> out;
  for (const json& c : j) {
    out.push_back(c.is_string() ? parse_condition_label(c.get<std::string>(), defaults) : condition_from_json(c));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

void ExperimentPlan::validate() const {
  if (conditions_a.empty() || conditions_b.empty()) throw Error(ErrorKind::InvalidArgument, "empty experiment grid");
  if (iterations_per_cell == 0) throw Error(ErrorKind::InvalidArgument, "iterations_per_cell must be positive");
  if (rounds_per_game <= 0) throw Error(ErrorKind::InvalidArgument, "rounds_per_game must be positive");
  if (!allow_non_pd && !matrix.is_prisoners_dilemma()) {
    throw Error(ErrorKind::InvalidMatrix, "payoff matrix is not a prisoner's dilemma");
  }
  for (const Condition& c : conditions_a) {
    if (!is_agent_condition(c)) throw Error(ErrorKind::InvalidArgument, "player A condition " + label(c) + " is not an agent");
    if (const auto* s = std::get_if<SteeringSpec>(&c)) s->validate();
  }
  for (const Condition& c : conditions_b) {
    check_opponent(c, setup);
    if (const auto* s = std::get_if<SteeringSpec>(&c)) s->validate();
  }
}

json ExperimentPlan::to_json() const {
  json a = json::array();
  json b = json::array();
  for (const auto& c : conditions_a) a.push_back(condition_to_json(c));
  for (const auto& c : conditions_b) b.push_back(condition_to_json(c));
  return {{"setup", std::string(to_string(setup))},
          {"conditions_a", std::move(a)},
          {"conditions_b", std::move(b)},
          {"iterations_per_cell", iterations_per_cell},
          {"rounds_per_game", rounds_per_game},
          {"master_seed", master_seed},
          {"payoff", payoff_json(matrix)},
          {"allow_non_pd", allow_non_pd},
          {"agents", agents}};
}

ExperimentPlan ExperimentPlan::from_json(const json& config) {
  try {
    const SetupKind setup = parse_setup_kind(config.at("setup").get<std::string>());
    ExperimentPlan plan = default_for(setup, config.value("master_seed", std::uint64_t{0}));
    SteeringSpec defaults;
    if (config.contains("steering")) {
      const json& s = config.at("steering");
      defaults.coefficient = s.value("coefficient", defaults.coefficient);
      defaults.layer_start = s.value("layer_start", defaults.layer_start);
      defaults.layer_end = s.value("layer_end", defaults.layer_end);
      defaults.validate();
      plan.conditions_a = big_five_grid(defaults);
      if (setup == SetupKind::Setup3) plan.conditions_b = big_five_grid(defaults);
    }
    if (config.contains("conditions_a")) plan.conditions_a = conditions_from_json(config.at("conditions_a"), defaults);
    for (const char* key : {"conditions_b", "opponents"}) {
      if (config.contains(key)) plan.conditions_b = conditions_from_json(config.at(key), defaults);
    }
    plan.iterations_per_cell = config.value("iterations_per_cell", plan.iterations_per_cell);
    plan.rounds_per_game = config.value("rounds_per_game", plan.rounds_per_game);
    plan.allow_non_pd = config.value("allow_non_pd", false);
    if (config.contains("payoff")) {
      const json& p = config.at("payoff");
      const auto cell = [&](const char* key) { return Payoff{p.at(key).at(0).get<int>(), p.at(key).at(1).get<int>()}; };
      plan.matrix = PayoffMatrix(cell("cc"), cell("cd"), cell("dc"), cell("dd"), plan.allow_non_pd);
    }
    if (config.contains("agents")) plan.agents = config.at("agents");
    plan.validate();
    return plan;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("bad plan: ") + e.what());
  }
}

ExperimentPlan ExperimentPlan::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::DataError, "cannot read plan " + path.string());
  const json config = json::parse(in, nullptr, false);
  if (config.is_discarded()) throw Error(ErrorKind::ParseError, path.string() + " is not valid JSON");
  return from_json(config);
}

std::string ExperimentPlan::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

ExperimentPlan ExperimentPlan::default_for(SetupKind setup, std::uint64_t master_seed) {
  ExperimentPlan plan;
  plan.setup = setup;
  plan.master_seed = master_seed;
  plan.conditions_a = big_five_grid();
  switch (setup) {
    case SetupKind::Setup1:
      plan.conditions_b = {OpponentSpec::always_cooperate(), OpponentSpec::always_defect()};
      for (double p : kDefaultRandomSweep) plan.conditions_b.emplace_back(OpponentSpec::random(p));
      plan.iterations_per_cell = 20;
      break;
    case SetupKind::Setup2:
      plan.conditions_b = {OpponentSpec::altruistic(), OpponentSpec::selfish()};
      plan.iterations_per_cell = 20;
      break;
    case SetupKind::Setup3:
      plan.conditions_b = big_five_grid();
      plan.iterations_per_cell = 10;
      break;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Games

std::string game_id(SetupKind setup, std::size_t cell_index, std::size_t iteration_index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s-c%05zu-i%05zu", std::string(to_string(setup)).c_str(), cell_index,
                iteration_index);
  return buf;
}

namespace {

Action require_action(const TurnReply& r, const char* who) {
  if (!r.action) throw Error(ErrorKind::DataError, std::string(who) + " returned no action");
  return *r.action;
}

Action require_message(const TurnReply& r, const char* who) {
  if (!r.message) throw Error(ErrorKind::MissingMessage, std::string(who) + " returned no message");
  return *r.message;
}

Move to_move(TurnReply r, const char* who) {
  Move m;
  m.action = require_action(r, who);
  m.message = r.message;
  m.reasoning = std::move(r.reasoning);
  m.retries = r.retries;
  m.raw = std::move(r.raw);
  return m;
}

// Setup 3 rounds take two turns per player; keep both halves in the record.
Move merge_turns(TurnReply message_turn, TurnReply action_turn, const char* who) {
  Move m;
  m.message = require_message(message_turn, who);
  m.action = require_action(action_turn, who);
  m.reasoning = "[message]\n" + message_turn.reasoning + "\n[action]\n" + action_turn.reasoning;
  m.retries = message_turn.retries + action_turn.retries;
  m.raw = std::move(message_turn.raw);
  for (auto& r : action_turn.raw) m.raw.push_back(std::move(r));
  return m;
}

std::string rule_reasoning(const OpponentSpec& spec) { return "rule:" + spec.label(); }

}  // namespace

GameTranscript play_game(const ExperimentPlan& plan, std::size_t cell_index, std::size_t iteration_index,
                         const AgentResolver& resolver) {
  GameTranscript header;
  header.game_id = game_id(plan.setup, cell_index, iteration_index);
  header.setup_kind = plan.setup;
  header.condition_a = plan.condition_a_of(cell_index);
  header.condition_b = plan.condition_b_of(cell_index);
  header.seed = derive_seed(plan.master_seed, cell_index, iteration_index);
  header.cell_index = cell_index;
  header.iteration_index = iteration_index;
  header.rounds_per_game = plan.rounds_per_game;
  header.matrix = plan.matrix;
  const std::uint64_t seed = header.seed;

  Game game(std::move(header));
  const GameTranscript& so_far = game.transcript();

  std::unique_ptr<Agent> agent_a = resolver(so_far.condition_a, Role::A);
  std::unique_ptr<Agent> agent_b;
  if (plan.setup == SetupKind::Setup3) agent_b = resolver(so_far.condition_b, Role::B);
  if (!agent_a || (plan.setup == SetupKind::Setup3 && !agent_b)) {
    throw Error(ErrorKind::InvalidArgument, "no agent bound for " + so_far.game_id);
  }
  const OpponentSpec* rule = std::get_if<OpponentSpec>(&so_far.condition_b);
  StrategyState rule_state(seed);

  try {
    while (!game.complete()) {
      const int t = game.next_round_index();
      const auto round = static_cast<std::uint64_t>(t);
      TurnContext ctx;
      ctx.setup = plan.setup;
      ctx.transcript = &so_far;
      ctx.round_index = t;

      switch (plan.setup) {
        case SetupKind::Setup1: {
          ctx.role = Role::A;
          ctx.phase = Phase::Act;
          ctx.decode_seed = derive_stream_seed(seed, stream_tag::kDecodeA, round * 2);
          Move a = to_move(agent_a->take_turn(ctx), "player A");
          const Action b = rule_decide(*rule, rule_state, so_far.rounds);
          game.play_round(a, Move{b, std::nullopt, rule_reasoning(*rule), 0, {}});
          break;
        }
        case SetupKind::Setup2: {
          const Action intent = declare_intent(rule_state);
          ctx.role = Role::A;
          ctx.phase = Phase::MessageAndAct;
          ctx.opponent_declaration = intent;
          ctx.decode_seed = derive_stream_seed(seed, stream_tag::kDecodeA, round * 2);
          Move a = to_move(agent_a->take_turn(ctx), "player A");
          if (!a.message) throw Error(ErrorKind::MissingMessage, "player A returned no message");
          const Action heard = *a.message;
          const Action b = communication_adjust(*rule, intent, heard);
          game.play_round(a, Move{b, std::nullopt, rule_reasoning(*rule), 0, {}}, intent);
          break;
        }
        case SetupKind::Setup3: {
          // Messages are chosen without seeing the other's, then exchanged.
          TurnContext ca = ctx;
          ca.role = Role::A;
          ca.phase = Phase::Message;
          ca.decode_seed = derive_stream_seed(seed, stream_tag::kDecodeA, round * 2);
          TurnContext cb = ctx;
          cb.role = Role::B;
          cb.phase = Phase::Message;
          cb.decode_seed = derive_stream_seed(seed, stream_tag::kDecodeB, round * 2);
          TurnReply msg_a = agent_a->take_turn(ca);
          TurnReply msg_b = agent_b->take_turn(cb);
          const Action said_a = require_message(msg_a, "player A");
          const Action said_b = require_message(msg_b, "player B");

          ca.phase = cb.phase = Phase::ActAfterMessages;
          ca.own_message = said_a;
          ca.opponent_declaration = said_b;
          ca.decode_seed = derive_stream_seed(seed, stream_tag::kDecodeA, round * 2 + 1);
          cb.own_message = said_b;
          cb.opponent_declaration = said_a;
          cb.decode_seed = derive_stream_seed(seed, stream_tag::kDecodeB, round * 2 + 1);
          TurnReply act_a = agent_a->take_turn(ca);
          TurnReply act_b = agent_b->take_turn(cb);
          game.play_round(merge_turns(std::move(msg_a), std::move(act_a), "player A"),
                          merge_turns(std::move(msg_b), std::move(act_b), "player B"));
          break;
        }
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SidecarUnavailable) throw;
    game.mark_invalid(e.what());
  }
  return std::move(game).release();
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace checkpoint {

std::filesystem::path manifest_path(const std::filesystem::path& dir) { return dir / "manifest.json"; }

std::filesystem::path game_path(const std::filesystem::path& dir, std::size_t cell, std::size_t iteration) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "c%05zu-i%05zu.json", cell, iteration);
  return dir / "games" / buf;
}

void prepare(const std::filesystem::path& dir, const ExperimentPlan& plan) {
  std::filesystem::create_directories(dir / "games");
  const auto manifest = manifest_path(dir);
  const std::string fingerprint = plan.fingerprint();
  if (std::filesystem::exists(manifest)) {
    std::ifstream in(manifest);
    const json m = json::parse(in, nullptr, false);
    if (m.is_discarded() || m.value("schema_version", 0) != kSchemaVersion) {
      throw Error(ErrorKind::DataError, manifest.string() + " is not a checkpoint manifest");
    }
    if (m.value("plan_fingerprint", "") != fingerprint) {
      throw Error(ErrorKind::PlanMismatch, dir.string() + " holds a different plan (" +
                                               m.value("plan_fingerprint", "") + " vs " + fingerprint + ")");
    }
    return;
  }
  const json m{{"schema_version", kSchemaVersion},
               {"plan_fingerprint", fingerprint},
               {"planned_games", plan.planned_games()},
               {"plan", plan.to_json()}};
  const auto tmp = manifest.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << m.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::DataError, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, manifest);
}

void store_game(const std::filesystem::path& dir, const GameTranscript& game) {
  const auto path = game_path(dir, game.cell_index, game.iteration_index);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << serialize_transcript(game) << '\n';
    out.flush();
    if (!out) throw Error(ErrorKind::DataError, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<GameTranscript> load_games(const std::filesystem::path& dir, const ExperimentPlan& plan) {
  std::vector<GameTranscript> games;
  const auto games_dir = dir / "games";
  if (!std::filesystem::is_directory(games_dir)) return games;
  for (const auto& entry : std::filesystem::directory_iterator(games_dir)) {
    const auto& path = entry.path();
    if (path.extension() == ".tmp") {
      std::filesystem::remove(path);
      continue;
    }
    if (path.extension() != ".json") continue;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::getline(in, line);
    try {
      GameTranscript g = parse_transcript(line);
      const bool belongs = g.setup_kind == plan.setup && g.cell_index < plan.cell_count() &&
                           g.iteration_index < plan.iterations_per_cell &&
                           g.seed == derive_seed(plan.master_seed, g.cell_index, g.iteration_index) &&
                           path == game_path(dir, g.cell_index, g.iteration_index);
      if (belongs) games.push_back(std::move(g));
    } catch (const Error&) {
      // Replayed.
    }
  }
  return games;
}

}  // namespace checkpoint

// ---------------------------------------------------------------------------
// Runner

RunResult run_plan(const ExperimentPlan& plan, const AgentResolver& resolver, const RunOptions& options) {
  plan.validate();
  for (const Condition& c : plan.conditions_a) {
    if (!resolver(c, Role::A)) throw Error(ErrorKind::InvalidArgument, "no agent bound for " + label(c));
  }
  if (plan.setup == SetupKind::Setup3) {
    for (const Condition& c : plan.conditions_b) {
      if (!resolver(c, Role::B)) throw Error(ErrorKind::InvalidArgument, "no agent bound for " + label(c));
    }
  }

  const std::size_t planned = plan.planned_games();
  const std::size_t iterations = plan.iterations_per_cell;
  std::vector<std::optional<GameTranscript>> slots(planned);

  RunResult result;
  result.planned = planned;
  if (options.checkpoint_dir) {
    checkpoint::prepare(*options.checkpoint_dir, plan);
    for (GameTranscript& g : checkpoint::load_games(*options.checkpoint_dir, plan)) {
      const std::size_t idx = g.cell_index * iterations + g.iteration_index;
      slots[idx] = std::move(g);
      ++result.resumed;
    }
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < planned; ++i) {
    if (!slots[i]) todo.push_back(i);
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> started{0};
  std::atomic<bool> stop{false};
  std::mutex sink;
  std::exception_ptr failure;

  const auto worker = [&] {
    while (!stop.load()) {
      if (options.cancel != nullptr && options.cancel->load()) break;
      if (options.max_new_games && started.fetch_add(1) >= *options.max_new_games) break;
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) break;
      const std::size_t idx = todo[k];
      try {
        GameTranscript g = play_game(plan, idx / iterations, idx % iterations, resolver);
        std::lock_guard lock(sink);
        if (options.checkpoint_dir) checkpoint::store_game(*options.checkpoint_dir, g);
        if (options.on_game_finished) options.on_game_finished(g);
        slots[idx] = std::move(g);
      } catch (...) {
        std::lock_guard lock(sink);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(options.workers, todo.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& slot : slots) {
    if (!slot) continue;
    if (!slot->valid) ++result.invalid;
    result.transcripts.push_back(std::move(*slot));
  }
  result.played = result.transcripts.size() - result.resumed;
  result.interrupted = result.transcripts.size() < planned;
  return result;
}

}  // namespace ipd
