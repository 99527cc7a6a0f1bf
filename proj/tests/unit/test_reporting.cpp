#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "ipd/errors.hpp"
#include "ipd/reporting.hpp"
#include "ipd/tournament.hpp"
#include "support/agents.hpp"
#include "support/fixtures.hpp"

using namespace ipd;
using namespace ipd::testing;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ipd::Error");
  return ErrorKind::DataError;
}

GameTranscript with_cell(GameTranscript g, Condition a, std::size_t cell, std::size_t iteration) {
  g.condition_a = std::move(a);
  g.cell_index = cell;
  g.iteration_index = iteration;
  g.game_id = game_id(g.setup_kind, cell, iteration);
  return g;
}

std::vector<GameTranscript> setup3_games() {
  auto client = std::make_shared<InProcessSidecar>();
  ExperimentPlan plan = ExperimentPlan::default_for(SetupKind::Setup3, 3);
  plan.iterations_per_cell = 2;
  return run_plan(plan, llm_resolver(client), {.workers = 2}).transcripts;
}

}  // namespace

TEST_CASE("transcript json round-trip") {
  auto client = std::make_shared<InProcessSidecar>();
  for (SetupKind setup : {SetupKind::Setup1, SetupKind::Setup2, SetupKind::Setup3}) {
    ExperimentPlan plan = ExperimentPlan::default_for(setup, 21);
    plan.iterations_per_cell = 1;
    if (setup == SetupKind::Setup3) plan.conditions_b.resize(3);
    for (const GameTranscript& g : run_plan(plan, llm_resolver(client), {.workers = 2}).transcripts) {
      const std::string line = serialize_transcript(g);
      CHECK(line.find('\n') == std::string::npos);
      const GameTranscript back = parse_transcript(line);
      CHECK(serialize_transcript(back) == line);
      CHECK(back.rounds.size() == g.rounds.size());
      CHECK(label(back.condition_a) == label(g.condition_a));
      CHECK(label(back.condition_b) == label(g.condition_b));
    }
  }
  const GameTranscript fixture = make_game(SetupKind::Setup1, OpponentSpec::random(0.3), "CD", "DD");
  GameTranscript invalid = fixture;
  invalid.valid = false;
  invalid.invalid_reason = "no usable answer";
  CHECK(parse_transcript(serialize_transcript(invalid)).invalid_reason == "no usable answer");
  CHECK(kind_of([] { parse_transcript("{"); }) == ErrorKind::DataError);
  CHECK(kind_of([] { parse_transcript("[]"); }) == ErrorKind::DataError);

  nlohmann::json tampered = transcript_to_json(fixture);
  tampered["rounds"][0]["years_a"] = 4;
  CHECK(kind_of([&] { transcript_from_json(tampered); }) == ErrorKind::DataError);
}

TEST_CASE("condition json") {
  for (const Condition& c : big_five_grid()) CHECK(label(condition_from_json(condition_to_json(c))) == label(c));
  for (const Condition c : {Condition{OpponentSpec::random(0.7)}, Condition{OpponentSpec::selfish()},
                            Condition{OpponentSpec::scripted({Action::Cooperate, Action::Defect})}}) {
    CHECK(label(condition_from_json(condition_to_json(c))) == label(c));
  }
  const auto s = std::get<SteeringSpec>(condition_from_json(
      condition_to_json(SteeringSpec{Trait::Neuroticism, Direction::Minus, 2.5, -12, -3})));
  CHECK(s.coefficient == 2.5);
  CHECK(s.layer_start == -12);
  CHECK(s.layer_end == -3);
}

TEST_CASE("transcript files") {
  const fs::path path = fs::temp_directory_path() / "ipd-test-transcripts.jsonl";
  fs::remove(path);
  const std::vector<GameTranscript> games{
      make_game(SetupKind::Setup1, OpponentSpec::always_cooperate(), "CC", "CC"),
      make_game(SetupKind::Setup1, OpponentSpec::always_defect(), "CD", "DD")};
  write_transcript_file(path, "00000000000000aa", games);
  {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == R"({"plan_fingerprint":"00000000000000aa","schema":"ipd-transcripts","version":1})");
  }
  TranscriptFile f = read_transcript_file(path);
  CHECK(f.version == 1);
  CHECK(f.plan_fingerprint == "00000000000000aa");
  CHECK(f.games.size() == 2);

  {
    TranscriptWriter w(path, "00000000000000aa");
    w.append(games[0]);
  }
  CHECK(read_transcript_file(path).games.size() == 3);
  CHECK(kind_of([&] { TranscriptWriter(path, "00000000000000bb"); }) == ErrorKind::PlanMismatch);

  { std::ofstream(path, std::ios::app) << "not json\n"; }
  CHECK(kind_of([&] { read_transcript_file(path); }) == ErrorKind::DataError);
  { std::ofstream(path, std::ios::trunc) << "{\"schema\":\"other\",\"version\":1}\n"; }
  CHECK(kind_of([&] { read_transcript_file(path); }) == ErrorKind::DataError);
  CHECK(kind_of([] { read_transcript_file("/nonexistent/ipd.jsonl"); }) == ErrorKind::DataError);
  fs::remove(path);
}

TEST_CASE("rate export") {
  const Condition ap = SteeringSpec{Trait::Agreeableness, Direction::Plus};
  std::vector<GameTranscript> games{
      with_cell(make_game(SetupKind::Setup1, OpponentSpec::random(0.3), "CDCCCDCCCC", "DCCDCCCCCC"), Baseline{}, 2, 0),
      with_cell(make_game(SetupKind::Setup1, OpponentSpec::random(0.7), "CCCCCCCCCC", "DCDCDCDCDC"), Baseline{}, 4, 0),
      with_cell(make_game(SetupKind::Setup1, OpponentSpec::random(0.3), "CCCCCCCCCC", "CCCCCCCCCC"), ap, 7, 0),
      with_cell(make_game(SetupKind::Setup1, OpponentSpec::always_cooperate(), "CCDCCCCCCC", "CCCCCCCCCC"), ap, 5, 0),
  };

  SUBCASE("pooled random opponents") {
    const RatesTable t = export_rates(games, MetricKind::Forgiveness);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].condition == "Baseline");
    CHECK(t.rows[0].opponent == "RD");
    CHECK(t.rows[0].median == 0.75);
    CHECK(t.rows[1].condition == "A+");
    CHECK(t.rows[1].n_defined == 0);
    CHECK_FALSE(t.rows[1].median.has_value());
    CHECK(rates_to_csv(t) ==
          "condition,opponent,n_games,n_defined,median,q1,q3,values\n"
          "Baseline,RD,2,2,0.75,0.625,0.875,0.5;1\n"
          "A+,RD,1,0,NA,NA,NA,NA\n");
  }
  SUBCASE("separate random opponents") {
    const RatesTable t = export_rates(games, MetricKind::Forgiveness, {.random_grouping = RandomGrouping::Separate});
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0].opponent == "RD0.3");
    CHECK(t.rows[1].opponent == "RD0.7");
    CHECK(export_rates(games, MetricKind::Forgiveness, {.random_grouping = RandomGrouping::Both}).rows.size() == 5);
  }
  SUBCASE("pooled rounds") {
    const RatesTable t = export_rates(games, MetricKind::Forgiveness, {.aggregation = Aggregation::PooledRounds});
    CHECK(t.rows[0].median == doctest::Approx(5.0 / 6.0));
  }
  SUBCASE("invalid games are counted, not measured") {
    games[1].valid = false;
    const RatesTable t = export_rates(games, MetricKind::Forgiveness);
    CHECK(t.invalid_games == 1);
    CHECK(t.rows[0].n_games == 1);
    CHECK(t.rows[0].median == 0.5);
  }
  SUBCASE("troublemaking and json") {
    const RatesTable t = export_rates(games, MetricKind::Troublemaking);
    REQUIRE(t.rows.size() == 1);
    const auto j = nlohmann::json::parse(rates_to_json(t));
    CHECK(j["metric"] == "troublemaking");
    CHECK(j["rows"][0]["median"].get<double>() == doctest::Approx(1.0 / 9.0));
  }
  SUBCASE("nothing to measure") {
    CHECK(kind_of([&] { export_rates(games, MetricKind::Exploitability); }) == ErrorKind::EmptyInput);
    CHECK(kind_of([&] { export_rates(games, MetricKind::Lying); }) == ErrorKind::EmptyInput);
    CHECK(kind_of([] { export_rates({}, MetricKind::Cooperation); }) == ErrorKind::EmptyInput);
  }
  SUBCASE("metric names") {
    for (MetricKind k : {MetricKind::Troublemaking, MetricKind::Exploitability, MetricKind::Forgiveness,
                         MetricKind::Retaliatory, MetricKind::Lying, MetricKind::Cooperation,
                         MetricKind::TotalScore, MetricKind::PersonalScore}) {
      CHECK(parse_metric_kind(to_string(k)) == k);
    }
    CHECK(kind_of([] { parse_metric_kind("kindness"); }) == ErrorKind::ParseError);
  }
}

TEST_CASE("heatmap") {
  SUBCASE("fixed games") {
    const Condition ap = SteeringSpec{Trait::Agreeableness, Direction::Plus};
    const Condition am = SteeringSpec{Trait::Agreeableness, Direction::Minus};
    std::vector<GameTranscript> games;
    const auto add = [&](Condition a, Condition b, std::string_view xa, std::string_view xb) {
      GameTranscript g = make_game(SetupKind::Setup3, std::move(b), xa, xb, xa);
      g.condition_a = std::move(a);
      g.cell_index = games.size();
      games.push_back(std::move(g));
    };
    add(ap, ap, "CCCCCCCCCC", "CCCCCCCCCC");
    add(am, am, "DDDDDDDDDD", "DDDDDDDDDD");
    add(ap, am, "CCCCCCCCCC", "DDDDDDDDDD");
    add(am, ap, "DDDDDDDDDD", "CCCCCCCCCC");
    const Heatmap h = export_heatmap(games);
    const std::size_t p = *h.index_of("A+");
    const std::size_t m = *h.index_of("A-");
    CHECK(h.labels.front() == "Baseline");
    CHECK(h.total_mean[p][p] == 20.0);
    CHECK(h.total_mean[m][m] == 60.0);
    CHECK(h.personal_mean[p][m] == 50.0);
    CHECK(h.personal_mean[m][p] == -50.0);
    CHECK(h.total_median[p][m] == 50.0);
    CHECK(h.n_games[p][p] == 1);
    CHECK_FALSE(h.total_mean[0][0].has_value());
    const std::string csv = heatmap_to_csv(h);
    CHECK(csv.rfind("matrix,condition_a,Baseline,A+,A-,C+,C-,E+,E-,N+,N-,O+,O-\n", 0) == 0);
    CHECK(csv.find("\ntotal_mean,A+,NA,20,50,NA,") != std::string::npos);
    CHECK(csv.find("\npersonal_mean,A-,NA,-50,0,NA,") != std::string::npos);
  }
  SUBCASE("full grid") {
    const auto games = setup3_games();
    const Heatmap h = export_heatmap(games);
    CHECK(h.labels.size() == 11);
    for (std::size_t i = 0; i < 11; ++i) {
      for (std::size_t j = 0; j < 11; ++j) {
        CHECK(h.n_games[i][j] == 2);
        CHECK(*h.total_mean[i][j] >= 20.0);
        CHECK(*h.total_mean[i][j] <= 60.0);
      }
    }
  }
  CHECK(kind_of([] {
          const std::vector<GameTranscript> s1{make_game(SetupKind::Setup1, OpponentSpec::always_defect(), "C", "D")};
          export_heatmap(s1);
        }) == ErrorKind::EmptyInput);
}

TEST_CASE("report") {
  const auto games = setup3_games();
  std::vector<RatesTable> tables;
  for (MetricKind k : default_metrics(SetupKind::Setup3)) tables.push_back(export_rates(games, k));
  const RunSummary s = summarize_run(games, "0123456789abcdef", 242);
  const std::string text = render_report(s, tables);
  CHECK(text == render_report(summarize_run(games, "0123456789abcdef", 242), tables));
  CHECK(text.rfind("IPD tournament report\nplan: 0123456789abcdef\nsetup: setup3\ngames planned: 242\n"
                   "games valid: 242\ninvalid: 0\n", 0) == 0);
  CHECK(text.find("\nlying (") != std::string::npos);
  CHECK(text.find("\ntotal_score (") != std::string::npos);
  CHECK(text.find("Scores are prison years: lower is better.\n") != std::string::npos);

  const std::vector<GameTranscript> one{
      with_cell(make_game(SetupKind::Setup1, OpponentSpec::always_defect(), "CDDDDDDDDD", "DDDDDDDDDD"), Baseline{}, 1, 0)};
  const std::vector<RatesTable> t{export_rates(one, MetricKind::Exploitability)};
  CHECK(render_report(summarize_run(one, "", 1), t) ==
        "IPD tournament report\n"
        "plan: unknown\n"
        "setup: setup1\n"
        "games planned: 1\n"
        "games valid: 1\n"
        "invalid: 0\n"
        "\n"
        "exploitability (cooperation after B defected, vs AD)\n"
        "  condition opponent  median    q1        q3        defined/games\n"
        "  Baseline  AD        0         0         0         1/1\n"
        "\n"
        "Scores are prison years: lower is better.\n"
        "Medians are taken per game over defined values; undefined rates are excluded.\n");
  CHECK(format_number(std::nullopt) == "NA");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1.0 / 3.0) == "0.333333");
}
