#include "cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <ostream>

#include "ipd/errors.hpp"
#include "ipd/llm_gateway.hpp"
#include "ipd/reporting.hpp"

namespace ipd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted = true; }

const json& entry_for(const json& agents, const std::string& condition_label) {
  static const json kDefault = {{"kind", "llm"}};
  if (!agents.is_object()) return kDefault;
  if (agents.contains(condition_label)) return agents.at(condition_label);
  if (agents.contains("default")) return agents.at("default");
  return kDefault;
}

std::string resolve_url(const json& entry, const std::string& endpoint_override) {
  if (!endpoint_override.empty()) return endpoint_override;
  return entry.value("endpoint", Endpoint{}.url);
}

}  // namespace

AgentBinding binding_for(const json& agents, const Condition& condition, const std::string& endpoint_override) {
  const json& e = entry_for(agents, label(condition));
  AgentBinding b;
  try {
    const std::string kind = e.value("kind", "llm");
    if (kind == "scripted") {
      b.kind = BindingKind::Scripted;
      b.script = ScriptedPolicy::parse(e.at("policy").get<std::string>());
    } else if (kind == "llm") {
      b.kind = BindingKind::Llm;
      if (const auto* s = std::get_if<SteeringSpec>(&condition)) b.steering = *s;
      b.endpoint = Endpoint{resolve_url(e, endpoint_override)};
      b.max_retries = e.value("max_retries", b.max_retries);
      b.decode.temperature = e.value("temperature", b.decode.temperature);
      b.decode.max_new_tokens = e.value("max_new_tokens", b.decode.max_new_tokens);
      b.retry_backoff = std::chrono::milliseconds(e.value("retry_backoff_ms", b.retry_backoff.count()));
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown agent kind '" + kind + "' for " + label(condition));
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::ParseError, "agent entry for " + label(condition) + ": " + ex.what());
  }
  b.validate();
  return b;
}

bool plan_needs_sidecar(const ExperimentPlan& plan, const std::string& endpoint_override) {
  std::vector<Condition> players = plan.conditions_a;
  if (plan.setup == SetupKind::Setup3) players.insert(players.end(), plan.conditions_b.begin(), plan.conditions_b.end());
  for (const Condition& c : players) {
    if (binding_for(plan.agents, c, endpoint_override).kind == BindingKind::Llm) return true;
  }
  return false;
}

AgentResolver make_resolver(const ExperimentPlan& plan, const std::string& endpoint_override) {
  const json agents = plan.agents;
  return [agents, endpoint_override](const Condition& c, Role) -> std::unique_ptr<Agent> {
    AgentBinding b = binding_for(agents, c, endpoint_override);
    if (b.kind == BindingKind::Scripted) return std::make_unique<ScriptedAgent>(*b.script);
    // A client per agent: httplib serializes requests on one client, and
    // concurrent games should not wait on each other.
    auto client = std::make_shared<HttpSidecarClient>(*b.endpoint);
    return std::make_unique<LlmAgent>(std::move(b), std::move(client));
  };
}

namespace {

fs::path transcripts_in(const fs::path& in) {
  return fs::is_directory(in) ? in / "transcripts.jsonl" : in;
}

template <class E>
E pick(const std::string& value, const std::map<std::string, E>& choices, const char* what) {
  const auto it = choices.find(value);
  if (it == choices.end()) throw Error(ErrorKind::InvalidArgument, std::string("unknown ") + what + " '" + value + "'");
  return it->second;
}

struct RunArgs {
  std::string plan;
  std::string setup;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 4;
  std::string endpoint;
  std::optional<std::size_t> max_games;
};

int do_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentPlan plan;
  if (!a.plan.empty()) {
    plan = ExperimentPlan::load(a.plan);
  } else if (!a.setup.empty()) {
    plan = ExperimentPlan::default_for(parse_setup_kind(a.setup));
  } else {
    err << "run: one of --plan or --setup is required\n";
    return kExitUsage;
  }
  if (a.seed) plan.master_seed = *a.seed;
  plan.validate();

  std::string endpoint = a.endpoint;
  if (endpoint.empty()) {
    if (const char* env = std::getenv(kEndpointEnv); env != nullptr) endpoint = env;
  }
  if (plan_needs_sidecar(plan, endpoint)) {
    std::vector<Condition> players = plan.conditions_a;
    if (plan.setup == SetupKind::Setup3) players.insert(players.end(), plan.conditions_b.begin(), plan.conditions_b.end());
    std::vector<std::string> checked;
    for (const Condition& c : players) {
      const AgentBinding b = binding_for(plan.agents, c, endpoint);
      if (b.kind != BindingKind::Llm || std::find(checked.begin(), checked.end(), b.endpoint->url) != checked.end()) {
        continue;
      }
      Endpoint probe = *b.endpoint;
      probe.read_timeout = std::chrono::milliseconds(10000);
      if (!HttpSidecarClient(probe).health()) {
        err << "sidecar unreachable at " << b.endpoint->url << "\n";
        return kExitSidecar;
      }
      checked.push_back(b.endpoint->url);
    }
  }

  const fs::path dir(a.out);
  RunOptions options;
  options.workers = a.workers;
  options.checkpoint_dir = dir;
  options.max_new_games = a.max_games;
  options.cancel = &g_interrupted;
  g_interrupted = false;
  const auto previous = std::signal(SIGINT, on_sigint);
  RunResult r;
  try {
    r = run_plan(plan, make_resolver(plan, endpoint), options);
  } catch (...) {
    std::signal(SIGINT, previous);
    throw;
  }
  std::signal(SIGINT, previous);

  out << "plan " << plan.fingerprint() << ": " << r.transcripts.size() << "/" << r.planned << " games ("
      << r.resumed << " resumed, " << r.played << " played, " << r.invalid << " invalid)\n";
  if (!r.finished()) {
    out << "stopped early; run again with the same --out to resume\n";
    return kExitOk;
  }
  write_transcript_file(dir / "transcripts.jsonl", plan.fingerprint(), r.transcripts);
  out << "wrote " << (dir / "transcripts.jsonl").string() << "\n";
  return kExitOk;
}

int do_metrics(const std::string& in, const std::string& metric, const std::string& format,
               const std::string& grouping, const std::string& forgiveness, const std::string& aggregation,
               std::ostream& out) {
  const TranscriptFile f = read_transcript_file(transcripts_in(in));
  ExportOptions o;
  o.random_grouping = pick<RandomGrouping>(
      grouping, {{"pooled", RandomGrouping::Pooled}, {"separate", RandomGrouping::Separate}, {"both", RandomGrouping::Both}},
      "grouping");
  o.forgiveness = pick<ForgivenessMode>(forgiveness, {{"strict", ForgivenessMode::Strict}, {"loose", ForgivenessMode::Loose}},
                                        "forgiveness mode");
  o.aggregation = pick<Aggregation>(
      aggregation, {{"per-game", Aggregation::PerGameMedian}, {"pooled", Aggregation::PooledRounds}}, "aggregation");
  const RatesTable t = export_rates(f.games, parse_metric_kind(metric), o);
  out << (format == "json" ? rates_to_json(t) : rates_to_csv(t));
  return kExitOk;
}

int do_heatmap(const std::string& in, const std::string& path, std::ostream& out) {
  const TranscriptFile f = read_transcript_file(transcripts_in(in));
  const std::string csv = heatmap_to_csv(export_heatmap(f.games));
  if (path.empty()) {
    out << csv;
    return kExitOk;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  file << csv;
  if (!file) throw Error(ErrorKind::DataError, "cannot write " + path);
  return kExitOk;
}

int do_report(const std::string& in, std::ostream& out) {
  const fs::path file = transcripts_in(in);
  const TranscriptFile f = read_transcript_file(file);
  std::size_t planned = f.games.size();
  const fs::path manifest = file.parent_path() / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream m(manifest);
    const json j = json::parse(m, nullptr, false);
    if (!j.is_discarded()) planned = j.value("planned_games", planned);
  }
  std::vector<RatesTable> tables;
  if (!f.games.empty()) {
    for (MetricKind k : default_metrics(f.games.front().setup_kind)) {
      try {
        tables.push_back(export_rates(f.games, k));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptyInput) throw;
      }
    }
  }
  out << render_report(summarize_run(f.games, f.plan_fingerprint, planned), tables);
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SidecarUnavailable: return kExitSidecar;
    case ErrorKind::InvalidArgument: return kExitUsage;
    default: return kExitData;
  }
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Iterated Prisoner's Dilemma tournaments between steered LLM agents"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Play every game of a plan, resuming from --out if present");
  run->add_option("--plan", run_args.plan, "Plan file (JSON)")->check(CLI::ExistingFile);
  run->add_option("--setup", run_args.setup, "Use the default plan for setup1, setup2 or setup3");
  run->add_option("--out", run_args.out, "Run directory (checkpoints and transcripts.jsonl)")->required();
  run->add_option("--seed", run_args.seed, "Override the plan's master seed");
  run->add_option("--workers", run_args.workers, "Concurrent games")->check(CLI::PositiveNumber);
  run->add_option("--endpoint", run_args.endpoint, std::string("Sidecar URL; overrides ") + kEndpointEnv);
  run->add_option("--max-games", run_args.max_games, "Stop after playing this many new games");

  std::string in;
  std::string metric;
  std::string format = "csv";
  std::string grouping = "pooled";
  std::string forgiveness = "strict";
  std::string aggregation = "per-game";
  auto* metrics = app.add_subcommand("metrics", "Per-condition rate table");
  metrics->add_option("--in", in, "Run directory or transcripts file")->required();
  metrics->add_option("--metric", metric, "troublemaking, exploitability, forgiveness, retaliatory, lying, "
                                          "cooperation, total_score or personal_score")
      ->required()
      ->check(CLI::IsMember({"troublemaking", "exploitability", "forgiveness", "retaliatory", "lying", "cooperation",
                             "total_score", "personal_score"}));
  metrics->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  metrics->add_option("--random-grouping", grouping)->check(CLI::IsMember({"pooled", "separate", "both"}));
  metrics->add_option("--forgiveness", forgiveness)->check(CLI::IsMember({"strict", "loose"}));
  metrics->add_option("--aggregation", aggregation)->check(CLI::IsMember({"per-game", "pooled"}));

  std::string heatmap_out;
  auto* heatmap = app.add_subcommand("heatmap", "Setup 3 score matrices as CSV");
  heatmap->add_option("--in", in, "Run directory or transcripts file")->required();
  heatmap->add_option("--out", heatmap_out, "Output CSV (stdout if omitted)");

  auto* report = app.add_subcommand("report", "Plain-text summary of a run");
  report->add_option("--in", in, "Run directory or transcripts file")->required();

  std::string plan_setup;
  std::uint64_t plan_seed = 0;
  auto* plan = app.add_subcommand("plan", "Print the default plan for a setup");
  plan->add_option("--setup", plan_setup)->required()->check(CLI::IsMember({"setup1", "setup2", "setup3"}));
  plan->add_option("--seed", plan_seed);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream e_out;
    const int code = app.exit(e, o, e_out);
    out << o.str();
    err << e_out.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return do_run(run_args, out, err);
    if (*metrics) return do_metrics(in, metric, format, grouping, forgiveness, aggregation, out);
    if (*heatmap) return do_heatmap(in, heatmap_out, out);
    if (*report) return do_report(in, out);
    if (*plan) {
      out << ExperimentPlan::default_for(parse_setup_kind(plan_setup), plan_seed).to_json().dump(2) << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace ipd::cli
