#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ipd/game.hpp"
#include "ipd/metrics.hpp"

namespace ipd {

// Transcript serialization.

nlohmann::json transcript_to_json(const GameTranscript& transcript);
GameTranscript transcript_from_json(const nlohmann::json& json);  // throws DataError

nlohmann::json condition_to_json(const Condition& condition);
Condition condition_from_json(const nlohmann::json& json);

/// One line, no trailing newline.
std::string serialize_transcript(const GameTranscript& transcript);
GameTranscript parse_transcript(std::string_view line);

inline constexpr int kTranscriptSchemaVersion = 1;
inline constexpr std::string_view kTranscriptSchemaName = "ipd-transcripts";

/// Newline-delimited transcript file. The first line is a header
/// {"schema":"ipd-transcripts","version":1,"plan_fingerprint":"..."};
/// every following line is one game. Append-only.
class TranscriptWriter {
 public:
  /// Creates the file with its header, or reopens an existing one for
  /// appending after checking its header carries `plan_fingerprint`.
  TranscriptWriter(const std::filesystem::path& path, const std::string& plan_fingerprint);

  void append(const GameTranscript& transcript);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

struct TranscriptFile {
  int version = 0;
  std::string plan_fingerprint;
  std::vector<GameTranscript> games;
};

/// Throws DataError on a bad header or any unparseable line.
TranscriptFile read_transcript_file(const std::filesystem::path& path);

/// Writes header plus games in the given order, replacing the file.
void write_transcript_file(const std::filesystem::path& path, const std::string& plan_fingerprint,
                           std::span<const GameTranscript> games);

// Metric tables.

enum class MetricKind {
  Troublemaking,
  Exploitability,
  Forgiveness,
  Retaliatory,
  Lying,
  Cooperation,
  TotalScore,
  PersonalScore,
};

std::string_view to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view name);

/// Whether `kind` is measured on this game (opponent/setup compatibility).
bool metric_applies(MetricKind kind, const GameTranscript& game);

enum class RandomGrouping {
  Pooled,    // all Random(p) opponents reported as one "RD" row
  Separate,  // one row per p
  Both,
};

enum class Aggregation {
  PerGameMedian,  // rate per game, then median across games
  PooledRounds,   // events and opportunities summed across games
};

struct ExportOptions {
  RandomGrouping random_grouping = RandomGrouping::Pooled;
  ForgivenessMode forgiveness = ForgivenessMode::Strict;
  Aggregation aggregation = Aggregation::PerGameMedian;
};

/// Value of `kind` on one game; nullopt when the rate is undefined.
std::optional<double> metric_value(MetricKind kind, const GameTranscript& game,
                                   const ExportOptions& options = {});

struct RateRow {
  std::string condition;
  std::string opponent;
  std::size_t n_games = 0;
  std::size_t n_defined = 0;
  std::optional<double> median;
  std::optional<double> q1;
  std::optional<double> q3;
  std::vector<std::optional<double>> values;  // per game, iteration order
};

struct RatesTable {
  MetricKind metric = MetricKind::Troublemaking;
  std::vector<RateRow> rows;      // canonical (condition, opponent) order
  std::size_t invalid_games = 0;  // excluded from every row
};

/// Throws EmptyInput when no valid game is compatible with the metric.
RatesTable export_rates(std::span<const GameTranscript> transcripts, MetricKind metric,
                        const ExportOptions& options = {});

/// condition,opponent,n_games,n_defined,median,q1,q3,values
std::string rates_to_csv(const RatesTable& table);
std::string rates_to_json(const RatesTable& table);

/// Setup 3 score matrices, rows = condition of A, columns = condition of B.
struct Heatmap {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> n_games;
  std::vector<std::vector<std::optional<double>>> total_mean;
  std::vector<std::vector<std::optional<double>>> personal_mean;
  std::vector<std::vector<std::optional<double>>> total_median;
  std::vector<std::vector<std::optional<double>>> personal_median;
  std::size_t invalid_games = 0;

  std::optional<std::size_t> index_of(std::string_view label) const;
};

/// Labels: Baseline, A+, A-, C+, C-, E+, E-, N+, N-, O+, O-, then any other
/// label present. Throws EmptyInput without a valid Setup 3 game.
Heatmap export_heatmap(std::span<const GameTranscript> transcripts);

/// One block per matrix: "matrix,condition_a,<labels...>".
std::string heatmap_to_csv(const Heatmap& heatmap);

struct RunSummary {
  std::string plan_fingerprint;
  std::string setup;
  std::size_t planned = 0;
  std::size_t valid = 0;
  std::size_t invalid = 0;
};

/// Summarises every valid game in the set. Used by the report command.
RunSummary summarize_run(std::span<const GameTranscript> transcripts, std::string plan_fingerprint,
                         std::size_t planned);

/// Metrics reported for a setup by default.
std::vector<MetricKind> default_metrics(SetupKind setup);

/// Plain-text report, byte-stable for equal input.
std::string render_report(const RunSummary& summary, std::span<const RatesTable> tables);

/// "%.6g" or "NA".
std::string format_number(std::optional<double> value);

}  // namespace ipd
