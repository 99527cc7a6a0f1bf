#include "ipd/reporting.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "ipd/errors.hpp"

namespace ipd {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Serialization

json condition_to_json(const Condition& condition) {
  struct Visitor {
    json operator()(const Baseline&) const { return {{"type", "baseline"}}; }
    json operator()(const SteeringSpec& s) const {
      return {{"type", "steering"},
              {"trait", std::string(to_string(s.trait))},
              {"direction", s.direction == Direction::Plus ? "+" : "-"},
              {"coefficient", s.coefficient},
              {"layer_start", s.layer_start},
              {"layer_end", s.layer_end}};
    }
    json operator()(const OpponentSpec& o) const {
      json j{{"type", "opponent"}, {"label", o.label()}};
      if (o.kind == OpponentKind::Random) j["p"] = o.p;
      return j;
    }
  };
  return std::visit(Visitor{}, condition);
}

Condition condition_from_json(const json& j) {
  if (j.is_string()) return parse_condition_label(j.get<std::string>());
  const std::string type = j.at("type").get<std::string>();
  if (type == "baseline") return Baseline{};
  if (type == "steering") {
    SteeringSpec s;
    s.trait = parse_trait(j.at("trait").get<std::string>());
    const std::string d = j.at("direction").get<std::string>();
    if (d != "+" && d != "-") throw Error(ErrorKind::ParseError, "steering direction must be + or -");
    s.direction = d == "+" ? Direction::Plus : Direction::Minus;
    s.coefficient = j.value("coefficient", s.coefficient);
    s.layer_start = j.value("layer_start", s.layer_start);
    s.layer_end = j.value("layer_end", s.layer_end);
    s.validate();
    return s;
  }
  if (type == "opponent") {
    Condition c = parse_condition_label(j.at("label").get<std::string>());
    if (j.contains("p")) {
      auto& o = std::get<OpponentSpec>(c);
      o.p = j.at("p").get<double>();  // exact value; the label is rounded
      o.validate();
    }
    return c;
  }
  throw Error(ErrorKind::ParseError, "unknown condition type '" + type + "'");
}

namespace {

json payoff_to_json(const PayoffMatrix& m) {
  json j;
  const auto cell = [&](Action a, Action b) {
    const Payoff p = m.at(a, b);
    return json::array({p.years_a, p.years_b});
  };
  j["cc"] = cell(Action::Cooperate, Action::Cooperate);
  j["cd"] = cell(Action::Cooperate, Action::Defect);
  j["dc"] = cell(Action::Defect, Action::Cooperate);
  j["dd"] = cell(Action::Defect, Action::Defect);
  return j;
}

PayoffMatrix payoff_from_json(const json& j, bool allow_non_pd) {
  const auto cell = [&](const char* key) {
    const auto& c = j.at(key);
    return Payoff{c.at(0).get<int>(), c.at(1).get<int>()};
  };
  return PayoffMatrix(cell("cc"), cell("cd"), cell("dc"), cell("dd"), allow_non_pd);
}

json action_json(Action a) { return std::string(to_string(a)); }

json round_to_json(const RoundRecord& r) {
  json j{{"round", r.round_index},
         {"a_action", action_json(r.a_action)},
         {"b_action", action_json(r.b_action)},
         {"years_a", r.years_a},
         {"years_b", r.years_b},
         {"a_reasoning", r.a_reasoning}};
  if (r.b_declared_intent) j["b_declared_intent"] = action_json(*r.b_declared_intent);
  if (r.a_message) j["a_message"] = action_json(*r.a_message);
  if (r.b_message) j["b_message"] = action_json(*r.b_message);
  if (r.b_reasoning) j["b_reasoning"] = *r.b_reasoning;
  if (r.a_retries) j["a_retries"] = r.a_retries;
  if (r.b_retries) j["b_retries"] = r.b_retries;
  if (!r.a_raw.empty()) j["a_raw"] = r.a_raw;
  if (!r.b_raw.empty()) j["b_raw"] = r.b_raw;
  return j;
}

std::optional<Action> optional_action(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return parse_action(j.at(key).get<std::string>());
}

RoundRecord round_from_json(const json& j) {
  RoundRecord r;
  r.round_index = j.at("round").get<int>();
  r.a_action = parse_action(j.at("a_action").get<std::string>());
  r.b_action = parse_action(j.at("b_action").get<std::string>());
  r.years_a = j.at("years_a").get<int>();
  r.years_b = j.at("years_b").get<int>();
  r.a_reasoning = j.at("a_reasoning").get<std::string>();
  r.b_declared_intent = optional_action(j, "b_declared_intent");
  r.a_message = optional_action(j, "a_message");
  r.b_message = optional_action(j, "b_message");
  if (j.contains("b_reasoning")) r.b_reasoning = j.at("b_reasoning").get<std::string>();
  r.a_retries = j.value("a_retries", 0);
  r.b_retries = j.value("b_retries", 0);
  if (j.contains("a_raw")) r.a_raw = j.at("a_raw").get<std::vector<std::string>>();
  if (j.contains("b_raw")) r.b_raw = j.at("b_raw").get<std::vector<std::string>>();
  return r;
}

}  // namespace

json transcript_to_json(const GameTranscript& t) {
  json rounds = json::array();
  for (const RoundRecord& r : t.rounds) rounds.push_back(round_to_json(r));
  json j{{"game_id", t.game_id},
         {"setup", std::string(to_string(t.setup_kind))},
         {"condition_a", condition_to_json(t.condition_a)},
         {"condition_b", condition_to_json(t.condition_b)},
         {"seed", t.seed},
         {"cell", t.cell_index},
         {"iteration", t.iteration_index},
         {"rounds_per_game", t.rounds_per_game},
         {"payoff", payoff_to_json(t.matrix)},
         {"valid", t.valid},
         {"rounds", std::move(rounds)}};
  if (!t.invalid_reason.empty()) j["invalid_reason"] = t.invalid_reason;
  return j;
}

GameTranscript transcript_from_json(const json& j) {
  try {
    GameTranscript t;
    t.game_id = j.at("game_id").get<std::string>();
    t.setup_kind = parse_setup_kind(j.at("setup").get<std::string>());
    t.condition_a = condition_from_json(j.at("condition_a"));
    t.condition_b = condition_from_json(j.at("condition_b"));
    t.seed = j.at("seed").get<std::uint64_t>();
    t.cell_index = j.at("cell").get<std::size_t>();
    t.iteration_index = j.at("iteration").get<std::size_t>();
    t.rounds_per_game = j.at("rounds_per_game").get<int>();
    // The plan validated the ordering already; stored tables are taken as is.
    t.matrix = payoff_from_json(j.at("payoff"), true);
    t.valid = j.at("valid").get<bool>();
    t.invalid_reason = j.value("invalid_reason", std::string());
    for (const json& r : j.at("rounds")) t.rounds.push_back(round_from_json(r));
    validate_transcript(t);
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::DataError, std::string("malformed transcript: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DataError) throw;
    throw Error(ErrorKind::DataError, std::string("malformed transcript: ") + e.what());
  }
}

std::string serialize_transcript(const GameTranscript& t) { return transcript_to_json(t).dump(); }

GameTranscript parse_transcript(std::string_view line) {
  const json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::DataError, "transcript line is not JSON");
  return transcript_from_json(j);
}

namespace {

json header_json(const std::string& fingerprint) {
  return {{"schema", std::string(kTranscriptSchemaName)},
          {"version", kTranscriptSchemaVersion},
          {"plan_fingerprint", fingerprint}};
}

std::pair<int, std::string> parse_header(const std::string& line, const std::string& where) {
  const json h = json::parse(line, nullptr, false);
  if (h.is_discarded() || !h.is_object() || h.value("schema", "") != kTranscriptSchemaName) {
    throw Error(ErrorKind::DataError, where + ": missing transcript header");
  }
  const int version = h.value("version", 0);
  if (version != kTranscriptSchemaVersion) {
    throw Error(ErrorKind::DataError, where + ": unsupported schema version " + std::to_string(version));
  }
  return {version, h.value("plan_fingerprint", "")};
}

}  // namespace

TranscriptWriter::TranscriptWriter(const std::filesystem::path& path, const std::string& plan_fingerprint) {
  const bool exists = std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
  if (exists) {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    const auto [version, fp] = parse_header(first, path.string());
    if (fp != plan_fingerprint) {
      throw Error(ErrorKind::PlanMismatch, path.string() + " belongs to plan " + fp);
    }
  }
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorKind::DataError, "cannot open " + path.string());
  if (!exists) out_ << header_json(plan_fingerprint).dump() << '\n';
}

void TranscriptWriter::append(const GameTranscript& transcript) {
  out_ << serialize_transcript(transcript) << '\n';
  if (!out_) throw Error(ErrorKind::DataError, "write failed");
}

TranscriptFile read_transcript_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::DataError, "cannot read " + path.string());
  TranscriptFile file;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::DataError, path.string() + " is empty");
  std::tie(file.version, file.plan_fingerprint) = parse_header(line, path.string());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      file.games.push_back(parse_transcript(line));
    } catch (const Error& e) {
      throw Error(ErrorKind::DataError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return file;
}

void write_transcript_file(const std::filesystem::path& path, const std::string& plan_fingerprint,
                           std::span<const GameTranscript> games) {
  std::filesystem::remove(path);
  TranscriptWriter writer(path, plan_fingerprint);
  for (const GameTranscript& g : games) writer.append(g);
  writer.flush();
}

// ---------------------------------------------------------------------------
// Metric tables

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Troublemaking: return "troublemaking";
    case MetricKind::Exploitability: return "exploitability";
    case MetricKind::Forgiveness: return "forgiveness";
    case MetricKind::Retaliatory: return "retaliatory";
    case MetricKind::Lying: return "lying";
    case MetricKind::Cooperation: return "cooperation";
    case MetricKind::TotalScore: return "total_score";
    case MetricKind::PersonalScore: return "personal_score";
  }
  return "unknown";
}

MetricKind parse_metric_kind(std::string_view name) {
  for (MetricKind k : {MetricKind::Troublemaking, MetricKind::Exploitability, MetricKind::Forgiveness,
                       MetricKind::Retaliatory, MetricKind::Lying, MetricKind::Cooperation,
                       MetricKind::TotalScore, MetricKind::PersonalScore}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorKind::ParseError, "unknown metric '" + std::string(name) + "'");
}

namespace {

bool opponent_is(const GameTranscript& g, OpponentKind kind) {
  const auto* o = std::get_if<OpponentSpec>(&g.condition_b);
  return o != nullptr && o->kind == kind;
}

bool is_rate(MetricKind kind) {
  return kind != MetricKind::TotalScore && kind != MetricKind::PersonalScore;
}

RateValue rate_of(MetricKind kind, const GameTranscript& g, const ExportOptions& options) {
  switch (kind) {
    case MetricKind::Troublemaking: return troublemaking_rate(g);
    case MetricKind::Exploitability: return exploitability_rate(g);
    case MetricKind::Forgiveness: return forgiveness_rate(g, options.forgiveness);
    case MetricKind::Retaliatory: return retaliatory_rate(g);
    case MetricKind::Lying: return lying_rate(g);
    case MetricKind::Cooperation: return cooperation_rate(g);
    default: break;
  }
  throw Error(ErrorKind::InvalidArgument, std::string(to_string(kind)) + " is not a rate");
}

}  // namespace

bool metric_applies(MetricKind kind, const GameTranscript& g) {
  switch (kind) {
    case MetricKind::Troublemaking: return opponent_is(g, OpponentKind::AlwaysCooperate);
    case MetricKind::Exploitability: return opponent_is(g, OpponentKind::AlwaysDefect);
    case MetricKind::Forgiveness:
    case MetricKind::Retaliatory: return opponent_is(g, OpponentKind::Random);
    case MetricKind::Lying: return has_communication(g.setup_kind);
    case MetricKind::Cooperation:
    case MetricKind::TotalScore:
    case MetricKind::PersonalScore: return true;
  }
  return false;
}

std::optional<double> metric_value(MetricKind kind, const GameTranscript& g, const ExportOptions& options) {
  if (kind == MetricKind::TotalScore) return static_cast<double>(total_score(g));
  if (kind == MetricKind::PersonalScore) return static_cast<double>(personal_score(g));
  return rate_of(kind, g, options).value();
}

std::string format_number(std::optional<double> value) {
  if (!value) return "NA";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", *value == 0.0 ? 0.0 : *value);  // no "-0"
  return buf;
}

namespace {

using RowKey = std::pair<std::string, std::string>;

struct RowKeyLess {
  bool operator()(const RowKey& x, const RowKey& y) const {
    const auto kx = std::make_pair(canonical_order_key(x.first), canonical_order_key(x.second));
    const auto ky = std::make_pair(canonical_order_key(y.first), canonical_order_key(y.second));
    if (kx != ky) return kx < ky;
    return x < y;
  }
};

std::vector<const GameTranscript*> sorted_games(std::span<const GameTranscript> transcripts) {
  std::vector<const GameTranscript*> games;
  games.reserve(transcripts.size());
  for (const auto& g : transcripts) games.push_back(&g);
  std::stable_sort(games.begin(), games.end(), [](const GameTranscript* x, const GameTranscript* y) {
    return std::tie(x->cell_index, x->iteration_index, x->game_id) <
           std::tie(y->cell_index, y->iteration_index, y->game_id);
  });
  return games;
}

std::vector<std::string> opponent_labels(const GameTranscript& g, RandomGrouping grouping) {
  const std::string own = label(g.condition_b);
  if (!opponent_is(g, OpponentKind::Random)) return {own};
  switch (grouping) {
    case RandomGrouping::Pooled: return {"RD"};
    case RandomGrouping::Separate: return {own};
    case RandomGrouping::Both: return {own, "RD"};
  }
  return {own};
}

}  // namespace

RatesTable export_rates(std::span<const GameTranscript> transcripts, MetricKind metric,
                        const ExportOptions& options) {
  RatesTable table;
  table.metric = metric;
  struct Acc {
    std::vector<std::optional<double>> values;
    std::vector<RateValue> rates;
  };
  std::map<RowKey, Acc, RowKeyLess> rows;
  for (const GameTranscript* g : sorted_games(transcripts)) {
    if (!g->valid) {
      ++table.invalid_games;
      continue;
    }
    if (!g->complete() || !metric_applies(metric, *g)) continue;
    std::optional<double> value;
    RateValue rate;
    if (is_rate(metric)) {
      rate = rate_of(metric, *g, options);
      value = rate.value();
    } else {
      value = metric_value(metric, *g, options);
    }
    for (const std::string& opp : opponent_labels(*g, options.random_grouping)) {
      Acc& acc = rows[{label(g->condition_a), opp}];
      acc.values.push_back(value);
      acc.rates.push_back(rate);
    }
  }
  if (rows.empty()) {
    throw Error(ErrorKind::EmptyInput, "no valid game is measured by " + std::string(to_string(metric)));
  }
  for (auto& [key, acc] : rows) {
    RateRow row;
    row.condition = key.first;
    row.opponent = key.second;
    row.n_games = acc.values.size();
    row.n_defined = static_cast<std::size_t>(
        std::count_if(acc.values.begin(), acc.values.end(), [](const auto& v) { return v.has_value(); }));
    if (options.aggregation == Aggregation::PooledRounds && is_rate(metric)) {
      const auto pooled = pool(acc.rates).value();
      row.median = row.q1 = row.q3 = pooled;
    } else if (row.n_defined > 0) {
      const Summary s = aggregate(std::span<const std::optional<double>>(acc.values));
      row.median = s.median;
      row.q1 = s.q1;
      row.q3 = s.q3;
    }
    row.values = std::move(acc.values);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string rates_to_csv(const RatesTable& table) {
  std::ostringstream out;
  out << "condition,opponent,n_games,n_defined,median,q1,q3,values\n";
  for (const RateRow& r : table.rows) {
    out << r.condition << ',' << r.opponent << ',' << r.n_games << ',' << r.n_defined << ','
        << format_number(r.median) << ',' << format_number(r.q1) << ',' << format_number(r.q3) << ',';
    for (std::size_t i = 0; i < r.values.size(); ++i) out << (i ? ";" : "") << format_number(r.values[i]);
    out << '\n';
  }
  return out.str();
}

namespace {

json optional_number(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string rates_to_json(const RatesTable& table) {
  json rows = json::array();
  for (const RateRow& r : table.rows) {
    json values = json::array();
    for (const auto& v : r.values) values.push_back(optional_number(v));
    rows.push_back({{"condition", r.condition},
                    {"opponent", r.opponent},
                    {"n_games", r.n_games},
                    {"n_defined", r.n_defined},
                    {"median", optional_number(r.median)},
                    {"q1", optional_number(r.q1)},
                    {"q3", optional_number(r.q3)},
                    {"values", std::move(values)}});
  }
  json j{{"metric", std::string(to_string(table.metric))},
         {"invalid_games", table.invalid_games},
         {"rows", std::move(rows)}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Heatmap

std::optional<std::size_t> Heatmap::index_of(std::string_view l) const {
  const auto it = std::find(labels.begin(), labels.end(), l);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

Heatmap export_heatmap(std::span<const GameTranscript> transcripts) {
  Heatmap h;
  for (const Condition& c : big_five_grid()) h.labels.push_back(label(c));
  struct Cell {
    std::vector<std::optional<double>> total;
    std::vector<std::optional<double>> personal;
  };
  std::map<RowKey, Cell> cells;
  for (const GameTranscript* g : sorted_games(transcripts)) {
    if (g->setup_kind != SetupKind::Setup3) continue;
    if (!g->valid) {
      ++h.invalid_games;
      continue;
    }
    if (!g->complete()) continue;
    const RowKey key{label(g->condition_a), label(g->condition_b)};
    for (const std::string& l : {key.first, key.second}) {
      if (!h.index_of(l)) h.labels.push_back(l);
    }
    cells[key].total.push_back(static_cast<double>(total_score(*g)));
    cells[key].personal.push_back(static_cast<double>(personal_score(*g)));
  }
  if (cells.empty()) throw Error(ErrorKind::EmptyInput, "no valid setup3 game");
  std::stable_sort(h.labels.begin(), h.labels.end(), [](const std::string& x, const std::string& y) {
    return canonical_order_key(x) < canonical_order_key(y);
  });
  const std::size_t n = h.labels.size();
  const auto blank = [n]() { return std::vector<std::vector<std::optional<double>>>(n, std::vector<std::optional<double>>(n)); };
  h.n_games.assign(n, std::vector<std::size_t>(n, 0));
  h.total_mean = blank();
  h.personal_mean = blank();
  h.total_median = blank();
  h.personal_median = blank();
  for (const auto& [key, cell] : cells) {
    const std::size_t i = *h.index_of(key.first);
    const std::size_t j = *h.index_of(key.second);
    const Summary t = aggregate(std::span<const std::optional<double>>(cell.total));
    const Summary p = aggregate(std::span<const std::optional<double>>(cell.personal));
    h.n_games[i][j] = cell.total.size();
    h.total_mean[i][j] = t.mean;
    h.personal_mean[i][j] = p.mean;
    h.total_median[i][j] = t.median;
    h.personal_median[i][j] = p.median;
  }
  return h;
}

std::string heatmap_to_csv(const Heatmap& h) {
  std::ostringstream out;
  out << "matrix,condition_a";
  for (const auto& l : h.labels) out << ',' << l;
  out << '\n';
  const auto block = [&](const char* name, const std::vector<std::vector<std::optional<double>>>& m) {
    for (std::size_t i = 0; i < h.labels.size(); ++i) {
      out << name << ',' << h.labels[i];
      for (std::size_t j = 0; j < h.labels.size(); ++j) out << ',' << format_number(m[i][j]);
      out << '\n';
    }
  };
  block("total_mean", h.total_mean);
  block("personal_mean", h.personal_mean);
  block("total_median", h.total_median);
  block("personal_median", h.personal_median);
  for (std::size_t i = 0; i < h.labels.size(); ++i) {
    out << "n_games," << h.labels[i];
    for (std::size_t j = 0; j < h.labels.size(); ++j) out << ',' << h.n_games[i][j];
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Report

RunSummary summarize_run(std::span<const GameTranscript> transcripts, std::string plan_fingerprint,
                         std::size_t planned) {
  RunSummary s;
  s.plan_fingerprint = std::move(plan_fingerprint);
  s.planned = planned;
  s.setup = transcripts.empty() ? "unknown" : std::string(to_string(transcripts.front().setup_kind));
  for (const auto& g : transcripts) (g.valid ? s.valid : s.invalid) += 1;
  return s;
}

std::vector<MetricKind> default_metrics(SetupKind setup) {
  switch (setup) {
    case SetupKind::Setup1:
      return {MetricKind::Troublemaking, MetricKind::Exploitability, MetricKind::Forgiveness,
              MetricKind::Retaliatory, MetricKind::Cooperation};
    case SetupKind::Setup2:
      return {MetricKind::Lying, MetricKind::Cooperation};
    case SetupKind::Setup3:
      return {MetricKind::Lying, MetricKind::Cooperation, MetricKind::TotalScore, MetricKind::PersonalScore};
  }
  return {};
}

namespace {

std::string_view metric_caption(MetricKind kind) {
  switch (kind) {
    case MetricKind::Troublemaking: return "defection after B cooperated, vs AC";
    case MetricKind::Exploitability: return "cooperation after B defected, vs AD";
    case MetricKind::Forgiveness: return "cooperation after B cooperated following a defection, vs RD";
    case MetricKind::Retaliatory: return "defection after B defected, vs RD";
    case MetricKind::Lying: return "rounds where A's message differs from A's action";
    case MetricKind::Cooperation: return "rounds in which A cooperated";
    case MetricKind::TotalScore: return "prison years served by both players, lower is better";
    case MetricKind::PersonalScore: return "A's years minus B's years, lower is better for A";
  }
  return "";
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string render_report(const RunSummary& summary, std::span<const RatesTable> tables) {
  std::ostringstream out;
  out << "IPD tournament report\n";
  out << "plan: " << (summary.plan_fingerprint.empty() ? "unknown" : summary.plan_fingerprint) << '\n';
  out << "setup: " << summary.setup << '\n';
  out << "games planned: " << summary.planned << '\n';
  out << "games valid: " << summary.valid << '\n';
  out << "invalid: " << summary.invalid << '\n';
  for (const RatesTable& t : tables) {
    out << '\n' << to_string(t.metric) << " (" << metric_caption(t.metric) << ")\n";
    out << "  " << pad("condition", 10) << pad("opponent", 10) << pad("median", 10) << pad("q1", 10)
        << pad("q3", 10) << "defined/games\n";
    for (const RateRow& r : t.rows) {
      out << "  " << pad(r.condition, 10) << pad(r.opponent, 10) << pad(format_number(r.median), 10)
          << pad(format_number(r.q1), 10) << pad(format_number(r.q3), 10) << r.n_defined << '/' << r.n_games
          << '\n';
    }
  }
  out << '\n';
  out << "Scores are prison years: lower is better.\n";
  out << "Medians are taken per game over defined values; undefined rates are excluded.\n";
  return out.str();
}

}  // namespace ipd
