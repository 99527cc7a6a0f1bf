#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ipd/agent.hpp"
#include "ipd/conditions.hpp"
#include "ipd/game.hpp"

namespace ipd {

/// The grid of one experiment: every condition for A against every opponent
/// (Setups 1-2) or condition for B (Setup 3), `iterations_per_cell` games each.
struct ExperimentPlan {
  SetupKind setup = SetupKind::Setup1;
  std::vector<Condition> conditions_a;
  std::vector<Condition> conditions_b;
  std::size_t iterations_per_cell = 20;
  int rounds_per_game = 10;
  std::uint64_t master_seed = 0;
  PayoffMatrix matrix = PayoffMatrix::standard();
  bool allow_non_pd = false;
  /// Agent bindings as written in the config file. Opaque to the runner; it
  /// is part of the fingerprint so a checkpoint cannot be resumed with
  /// different agents.
  nlohmann::json agents = nullptr;

  std::size_t cell_count() const noexcept { return conditions_a.size() * conditions_b.size(); }
  std::size_t planned_games() const noexcept { return cell_count() * iterations_per_cell; }

  /// Cell index = a_index * |conditions_b| + b_index.
  const Condition& condition_a_of(std::size_t cell) const { return conditions_a.at(cell / conditions_b.size()); }
  const Condition& condition_b_of(std::size_t cell) const { return conditions_b.at(cell % conditions_b.size()); }

  /// Throws InvalidArgument: empty grid, zero iterations/rounds, or a
  /// condition that does not fit the setup (Setup 1 takes AC/AD/Random/
  /// Scripted opponents, Setup 2 Altruistic/Selfish, Setup 3 Baseline or
  /// steering on both sides; A is always Baseline or steering).
  void validate() const;

  nlohmann::json to_json() const;
  /// Reads the config file format; see README for the key set.
  static ExperimentPlan from_json(const nlohmann::json& config);
  static ExperimentPlan load(const std::filesystem::path& path);

  /// FNV-1a 64 over the canonical JSON form, as 16 hex digits.
  std::string fingerprint() const;

  /// Setup 1: big-five grid x {AC, AD, RD0.3, RD0.5, RD0.7}, 20 iterations.
  /// Setup 2: big-five grid x {ALT, SELF}, 20 iterations.
  /// Setup 3: big-five grid x big-five grid, 10 iterations.
  static ExperimentPlan default_for(SetupKind setup, std::uint64_t master_seed = 0);
};

/// Builds the agent that plays `condition` in `role` for one game. Called
/// once per game and role; Setup 1-2 opponents never go through it.
using AgentResolver = std::function<std::unique_ptr<Agent>(const Condition& condition, Role role)>;

std::string game_id(SetupKind setup, std::size_t cell_index, std::size_t iteration_index);

/// Plays a single game. Agent failures other than SidecarUnavailable mark the
/// transcript invalid with the error text; SidecarUnavailable propagates.
GameTranscript play_game(const ExperimentPlan& plan, std::size_t cell_index,
                         std::size_t iteration_index, const AgentResolver& resolver);

struct RunOptions {
  std::size_t workers = 4;
  /// One transcript file per game plus manifest.json. Games already present
  /// are loaded instead of replayed.
  std::optional<std::filesystem::path> checkpoint_dir;
  /// Stop scheduling new games after this many were played in this call.
  std::optional<std::size_t> max_new_games;
  const std::atomic<bool>* cancel = nullptr;
  std::function<void(const GameTranscript&)> on_game_finished;
};

struct RunResult {
  std::vector<GameTranscript> transcripts;  // sorted by (cell, iteration)
  std::size_t planned = 0;
  std::size_t resumed = 0;
  std::size_t played = 0;
  std::size_t invalid = 0;
  bool interrupted = false;

  bool finished() const noexcept { return transcripts.size() == planned; }
};

/// Runs every (cell, iteration) of the plan on a bounded worker pool. Each
/// game's seed is derive_seed(master_seed, cell, iteration), so results do
/// not depend on scheduling.
RunResult run_plan(const ExperimentPlan& plan, const AgentResolver& resolver, const RunOptions& options = {});

namespace checkpoint {

inline constexpr int kSchemaVersion = 1;

std::filesystem::path manifest_path(const std::filesystem::path& dir);
std::filesystem::path game_path(const std::filesystem::path& dir, std::size_t cell, std::size_t iteration);

/// Creates the layout or, if a manifest exists, checks it belongs to `plan`
/// (PlanMismatch otherwise).
void prepare(const std::filesystem::path& dir, const ExperimentPlan& plan);

/// Writes through a temporary file and rename so a crash never leaves a
/// half-written game behind.
void store_game(const std::filesystem::path& dir, const GameTranscript& game);

/// Completed games found on disk. Unreadable files are skipped (replayed).
std::vector<GameTranscript> load_games(const std::filesystem::path& dir, const ExperimentPlan& plan);

}  // namespace checkpoint

}  // namespace ipd
