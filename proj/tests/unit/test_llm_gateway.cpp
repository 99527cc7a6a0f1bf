#include "doctest.h"

#include <deque>

#include "ipd/errors.hpp"
#include "ipd/llm_gateway.hpp"
#include "stub_sidecar.hpp"
#include "support/fixtures.hpp"

using namespace ipd;
using ipd::testing::make_game;

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

const char* const kTemplateNames[] = {
    "VERSION",        "history_first_round", "history_setup1",      "history_setup2",
    "history_setup3", "payoff_rules",        "system_setup1",       "system_setup2",
    "system_setup3",  "user_setup1",         "user_setup2",         "user_setup3_message",
    "user_setup3_action", "retry_suffix",
};

// Replays canned replies; records every request.
class QueueClient final : public SidecarClient {
 public:
  std::deque<std::string> replies;
  int transport_failures = 0;
  std::vector<SidecarRequest> seen;

  SidecarResponse steered_chat(const SidecarRequest& request) override {
    seen.push_back(request);
    if (transport_failures > 0) {
      --transport_failures;
      throw Error(ErrorKind::SidecarUnavailable, "connection refused");
    }
    REQUIRE_FALSE(replies.empty());
    std::string text = replies.front();
    replies.pop_front();
    return {text, "queue", request.trait.has_value()};
  }
};

AgentBinding llm_binding(std::string url = "http://127.0.0.1:1") {
  AgentBinding b;
  b.kind = BindingKind::Llm;
  b.endpoint = Endpoint{std::move(url), std::chrono::milliseconds(500), std::chrono::milliseconds(5000)};
  b.retry_backoff = std::chrono::milliseconds(0);
  return b;
}

Prompts sample_prompts() {
  const GameTranscript t = make_game(SetupKind::Setup1, OpponentSpec::always_defect(), "", "");
  return build_prompts(SetupKind::Setup1, Role::A, t, RoundContext{});
}

}  // namespace

TEST_CASE("built-in templates match the asset directory") {
  const TemplateSet disk = TemplateSet::load_directory(std::string(IPD_SOURCE_DIR) + "/assets/templates");
  for (const char* name : kTemplateNames) {
    CAPTURE(name);
    REQUIRE(TemplateSet::builtin().contains(name));
    CHECK(TemplateSet::builtin().get(name) == disk.get(name));
  }
  CHECK(TemplateSet::builtin().version() == "1");
}

TEST_CASE("prompt construction") {
  GameTranscript t = make_game(SetupKind::Setup1, OpponentSpec::always_defect(), "CD", "DD");
  t.rounds_per_game = 10;

  SUBCASE("setup 1") {
    const Prompts p = build_prompts(SetupKind::Setup1, Role::A, t, RoundContext{3, Phase::Act, {}, {}});
    CHECK(p.system.find("for 10 rounds") != std::string::npos);
    CHECK(p.system.find("If you both cooperate, you each serve 1 year in prison.") != std::string::npos);
    CHECK(p.system.find("you serve 5 years and the other prisoner serves 0 years") != std::string::npos);
    CHECK(p.system.find("If you both defect, you each serve 3 years in prison.") != std::string::npos);
    CHECK(p.user ==
          "History of the game so far:\n"
          "Round 1: you chose to cooperate and the other prisoner chose to defect. You received 5 years in prison "
          "and the other prisoner received 0 years.\n"
          "Round 2: you chose to defect and the other prisoner chose to defect. You received 3 years in prison "
          "and the other prisoner received 3 years.\n\n"
          "This is round 3 of 10. Think through your decision step by step. Then end your reply with one final "
          "line of exactly this form:\nACTION: <cooperate or defect>");
    CHECK(p.system.find("{{") == std::string::npos);
  }
  SUBCASE("perspective flips the history") {
    const Prompts p = build_prompts(SetupKind::Setup1, Role::B, t, RoundContext{3, Phase::Act, {}, {}});
    CHECK(p.user.find("Round 1: you chose to defect and the other prisoner chose to cooperate. You received 0 years")
          != std::string::npos);
  }
  SUBCASE("first round") {
    const GameTranscript empty = make_game(SetupKind::Setup1, OpponentSpec::always_defect(), "", "");
    const Prompts p = build_prompts(SetupKind::Setup1, Role::A, empty, RoundContext{});
    CHECK(p.user.find("History of the game so far:\nThis is the first round.") == 0);
  }
  SUBCASE("setup 2 embeds the declared intent") {
    const GameTranscript s2 = make_game(SetupKind::Setup2, OpponentSpec::selfish(), "C", "D", "C");
    const Prompts p =
        build_prompts(SetupKind::Setup2, Role::A, s2, RoundContext{2, Phase::MessageAndAct, Action::Defect, {}});
    CHECK(p.user.find("The other prisoner says it intends to defect.") != std::string::npos);
    CHECK(p.user.find("MESSAGE: <") != std::string::npos);
    CHECK(p.user.find("ACTION: <") != std::string::npos);
    CHECK(kind_of([&] {
            build_prompts(SetupKind::Setup2, Role::A, s2, RoundContext{2, Phase::MessageAndAct, {}, {}});
          }) == ErrorKind::MissingMessage);
  }
  SUBCASE("setup 3 phases") {
    const GameTranscript s3 = make_game(SetupKind::Setup3, Baseline{}, "", "");
    const Prompts m = build_prompts(SetupKind::Setup3, Role::B, s3, RoundContext{1, Phase::Message, {}, {}});
    CHECK(m.user.find("MESSAGE: <") != std::string::npos);
    CHECK(m.user.find("ACTION:") == std::string::npos);
    const Prompts a = build_prompts(SetupKind::Setup3, Role::B, s3,
                                    RoundContext{1, Phase::ActAfterMessages, Action::Cooperate, Action::Defect});
    CHECK(a.user.find("You told the other prisoner you would defect. The other prisoner told you it would "
                      "cooperate.") != std::string::npos);
    CHECK(a.user.find("MESSAGE:") == std::string::npos);
    CHECK(kind_of([&] {
            build_prompts(SetupKind::Setup3, Role::B, s3, RoundContext{1, Phase::ActAfterMessages, Action::Cooperate, {}});
          }) == ErrorKind::MissingMessage);
    CHECK(kind_of([&] { build_prompts(SetupKind::Setup3, Role::B, s3, RoundContext{1, Phase::Act, {}, {}}); }) ==
          ErrorKind::InvalidArgument);
  }
  SUBCASE("missing templates") {
    CHECK(kind_of([&] { build_prompts(static_cast<SetupKind>(7), Role::A, t, RoundContext{}); }) ==
          ErrorKind::TemplateMissing);
    TemplateSet partial;
    partial.set("system_setup1", "sys");
    CHECK(kind_of([&] { build_prompts(SetupKind::Setup1, Role::A, t, RoundContext{}, partial); }) ==
          ErrorKind::TemplateMissing);
  }
  SUBCASE("deterministic") {
    const RoundContext c{3, Phase::Act, {}, {}};
    CHECK(build_prompts(SetupKind::Setup1, Role::A, t, c) == build_prompts(SetupKind::Setup1, Role::A, t, c));
  }
}

TEST_CASE("answer parsing") {
  SUBCASE("plain") {
    const Decision d = parse_decision("I think cooperation is best.\nACTION: cooperate", false);
    CHECK(d.action == Action::Cooperate);
    CHECK_FALSE(d.message.has_value());
    CHECK(d.reasoning == "I think cooperation is best.");
  }
  SUBCASE("case, markdown, synonyms") {
    CHECK(parse_decision("**Action:** Defect", false).action == Action::Defect);
    CHECK(parse_decision("decision: COOPERATE.", false).action == Action::Cooperate);
    CHECK(parse_decision("action_: defect!", false).action == Action::Defect);
  }
  SUBCASE("last label wins") {
    const Decision d = parse_decision("ACTION: cooperate\nOn reflection...\nACTION: defect", false);
    CHECK(d.action == Action::Defect);
    CHECK(d.reasoning == "ACTION: cooperate\nOn reflection...");
  }
  SUBCASE("message and action on one line") {
    const Decision d = parse_decision("reasons\nMESSAGE: cooperate ACTION: defect", true);
    CHECK(d.message == Action::Cooperate);
    CHECK(d.action == Action::Defect);
    CHECK(d.reasoning == "reasons");
  }
  SUBCASE("reasoning may discuss both moves") {
    const Decision d = parse_decision("Should I cooperate or defect? Hard to say.\nACTION: cooperate", false);
    CHECK(d.action == Action::Cooperate);
  }
  SUBCASE("word boundaries") {
    CHECK(kind_of([] { parse_decision("ACTION: cooperatively", false); }) == ErrorKind::Unparseable);
  }
  SUBCASE("failures") {
    CHECK(kind_of([] { parse_decision("I will cooperate.", false); }) == ErrorKind::Unparseable);
    CHECK(kind_of([] { parse_decision("ACTION: maybe", false); }) == ErrorKind::Unparseable);
    CHECK(kind_of([] { parse_decision("ACTION: cooperate or defect", false); }) == ErrorKind::AmbiguousDecision);
    CHECK(kind_of([] { parse_decision("ACTION: defect", true); }) == ErrorKind::Unparseable);
    CHECK(kind_of([] { parse_decision("", false); }) == ErrorKind::Unparseable);
  }
  SUBCASE("message only") {
    const ParsedAnswer a = parse_answer("Let me signal peace.\nMESSAGE: cooperate", true, false);
    CHECK(a.message == Action::Cooperate);
    CHECK_FALSE(a.action.has_value());
  }
}

TEST_CASE("render and parse round-trip") {
  RandomStream rng(17);
  const char* const reasonings[] = {"", "short", "Two lines\nof thought.", "Mentions cooperate and defect freely."};
  for (int i = 0; i < 200; ++i) {
    Decision d;
    d.action = rng.coin();
    if (rng.bernoulli(0.5)) d.message = rng.coin();
    d.reasoning = reasonings[rng.next_u64() % 4];
    CHECK(parse_decision(render_decision(d), d.message.has_value()) == d);
  }
}

TEST_CASE("request wire format") {
  AgentBinding b = llm_binding();
  const Prompts p{"sys", "usr"};
  SUBCASE("baseline") {
    const nlohmann::json j = make_request(b, p, 77).to_json();
    CHECK(j.dump() ==
          R"({"coefficient":0.0,"direction":null,"layer_end":-5,"layer_start":-20,"max_new_tokens":512,)"
          R"("seed":77,"system":"sys","temperature":1.0,"trait":null,"user":"usr"})");
  }
  SUBCASE("steered") {
    b.steering = SteeringSpec{Trait::Agreeableness, Direction::Minus, 3.5, -20, -5};
    const SidecarRequest r = make_request(b, p, 5);
    const nlohmann::json j = r.to_json();
    CHECK(j["trait"] == "agreeableness");
    CHECK(j["direction"] == "-1");
    CHECK(j["coefficient"] == 3.5);
    CHECK(SidecarRequest::from_json(j) == r);
  }
  SUBCASE("rejects malformed bodies") {
    nlohmann::json j = make_request(b, p, 1).to_json();
    j["direction"] = "+1";
    CHECK(kind_of([&] { SidecarRequest::from_json(j); }) == ErrorKind::ParseError);
    j["trait"] = "openness";
    j["direction"] = "up";
    CHECK(kind_of([&] { SidecarRequest::from_json(j); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { SidecarRequest::from_json(nlohmann::json::array()); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { SidecarRequest::from_json(nlohmann::json{{"system", "s"}}); }) == ErrorKind::ParseError);
  }
}

TEST_CASE("binding validation") {
  AgentBinding b = llm_binding();
  CHECK_NOTHROW(b.validate());
  b.script = ScriptedPolicy{};
  CHECK(kind_of([&] { b.validate(); }) == ErrorKind::InvalidArgument);
  b = llm_binding();
  b.max_retries = -1;
  CHECK(kind_of([&] { b.validate(); }) == ErrorKind::InvalidArgument);
  b = llm_binding();
  b.steering = SteeringSpec{Trait::Openness, Direction::Plus, 0.0, -20, -5};
  CHECK(kind_of([&] { b.validate(); }) == ErrorKind::InvalidArgument);
  AgentBinding s;
  s.kind = BindingKind::Scripted;
  CHECK(kind_of([&] { s.validate(); }) == ErrorKind::InvalidArgument);
  s.script = ScriptedPolicy{};
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("retry loop") {
  const Prompts p = sample_prompts();
  AgentBinding b = llm_binding();

  SUBCASE("first reply usable") {
    QueueClient c;
    c.replies = {"ok\nACTION: defect"};
    const LlmOutcome o = decide_via_llm(b, p, 9, Phase::Act, c);
    CHECK(o.answer.action == Action::Defect);
    CHECK(o.retries == 0);
    CHECK(o.raw.size() == 1);
    CHECK(c.seen.at(0).user == p.user);
  }
  SUBCASE("malformed then good") {
    QueueClient c;
    c.replies = {"I cannot decide.", "ACTION: cooperate"};
    const LlmOutcome o = decide_via_llm(b, p, 9, Phase::Act, c);
    CHECK(o.answer.action == Action::Cooperate);
    CHECK(o.retries == 1);
    CHECK(o.raw == std::vector<std::string>{"I cannot decide.", "ACTION: cooperate"});
    REQUIRE(c.seen.size() == 2);
    CHECK(c.seen[1].user == p.user + TemplateSet::builtin().get("retry_suffix"));
    CHECK(c.seen[1].seed == c.seen[0].seed);
  }
  SUBCASE("persistent garbage") {
    QueueClient c;
    c.replies = {"x", "y", "z", "ACTION: cooperate or defect"};
    CHECK(kind_of([&] { decide_via_llm(b, p, 9, Phase::Act, c); }) == ErrorKind::RetriesExhausted);
    CHECK(c.seen.size() == 4);
  }
  SUBCASE("zero retries") {
    QueueClient c;
    b.max_retries = 0;
    c.replies = {"x"};
    CHECK(kind_of([&] { decide_via_llm(b, p, 9, Phase::Act, c); }) == ErrorKind::RetriesExhausted);
  }
  SUBCASE("transport failures share the budget") {
    QueueClient c;
    c.transport_failures = 2;
    c.replies = {"ACTION: defect"};
    CHECK(decide_via_llm(b, p, 9, Phase::Act, c).retries == 2);
    QueueClient dead;
    dead.transport_failures = 100;
    CHECK(kind_of([&] { decide_via_llm(b, p, 9, Phase::Act, dead); }) == ErrorKind::SidecarUnavailable);
    CHECK(dead.seen.size() == 4);
  }
}

TEST_CASE("http client against the stub sidecar") {
  stub::StubServer server;
  AgentBinding b = llm_binding(server.url());
  const Prompts p = sample_prompts();

  SUBCASE("health") {
    HttpSidecarClient client(*b.endpoint);
    const auto h = client.health();
    REQUIRE(h.has_value());
    CHECK((*h)["status"] == "ok");
    CHECK((*h)["model_id"] == "stub-model");
  }
  SUBCASE("round trip and determinism") {
    HttpSidecarClient client(*b.endpoint);
    b.steering = SteeringSpec{Trait::Agreeableness, Direction::Plus, 3.5, -20, -5};
    const LlmOutcome first = decide_via_llm(b, p, 1234, Phase::Act, client);
    const LlmOutcome second = decide_via_llm(b, p, 1234, Phase::Act, client);
    CHECK(first.raw == second.raw);
    CHECK(first.model_id == "stub-model");
    const auto sent = nlohmann::json::parse(server.requests().at(0));
    CHECK(sent["trait"] == "agreeableness");
    CHECK(sent["direction"] == "+1");
    CHECK(sent["seed"] == 1234);
  }
  SUBCASE("malformed then good over http") {
    int calls = 0;
    server.set_responder([&calls](const SidecarRequest&) {
      return calls++ == 0 ? std::string("no idea") : std::string("ACTION: cooperate");
    });
    HttpSidecarClient client(*b.endpoint);
    const LlmOutcome o = decide_via_llm(b, p, 1, Phase::Act, client);
    CHECK(o.retries == 1);
    const auto second = nlohmann::json::parse(server.requests().at(1));
    CHECK(second["user"].get<std::string>().ends_with(TemplateSet::builtin().get("retry_suffix")));
  }
  SUBCASE("persistent bad replies") {
    server.set_responder([](const SidecarRequest&) { return std::string("the weather is nice"); });
    HttpSidecarClient client(*b.endpoint);
    CHECK(kind_of([&] { decide_via_llm(b, p, 1, Phase::Act, client); }) == ErrorKind::RetriesExhausted);
    CHECK(server.requests().size() == 4);
  }
  SUBCASE("503 is retried") {
    server.fail_next(2);
    HttpSidecarClient client(*b.endpoint);
    CHECK(decide_via_llm(b, p, 1, Phase::Act, client).retries == 2);
  }
  SUBCASE("4xx is rejected without retry") {
    HttpSidecarClient client(Endpoint{server.url() + "/wrong-prefix"});
    CHECK(kind_of([&] { client.steered_chat(make_request(b, p, 1)); }) == ErrorKind::SidecarRejected);
    CHECK(kind_of([&] { decide_via_llm(b, p, 1, Phase::Act, client); }) == ErrorKind::SidecarRejected);
  }
  SUBCASE("unknown trait answers 422") {
    httplib::Client raw(server.url());
    nlohmann::json body = make_request(b, p, 1).to_json();
    body["trait"] = "charisma";
    body["direction"] = "+1";
    auto res = raw.Post("/v1/steered-chat", body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 422);
    res = raw.Post("/v1/steered-chat", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
  }
}

TEST_CASE("unreachable sidecar") {
  std::string url;
  {
    stub::StubServer gone;
    url = gone.url();
  }
  AgentBinding b = llm_binding(url);
  HttpSidecarClient client(*b.endpoint);
  CHECK_FALSE(client.health().has_value());
  CHECK(kind_of([&] { decide_via_llm(b, sample_prompts(), 1, Phase::Act, client); }) ==
        ErrorKind::SidecarUnavailable);
}

TEST_CASE("llm agent turn") {
  stub::StubServer server;
  AgentBinding b = llm_binding(server.url());
  auto client = std::make_shared<HttpSidecarClient>(*b.endpoint);
  LlmAgent agent(b, client);
  const GameTranscript t = make_game(SetupKind::Setup3, Baseline{}, "", "");
  TurnContext ctx;
  ctx.setup = SetupKind::Setup3;
  ctx.phase = Phase::Message;
  ctx.transcript = &t;
  ctx.decode_seed = 3;
  const TurnReply m = agent.take_turn(ctx);
  CHECK(m.message.has_value());
  CHECK_FALSE(m.action.has_value());
  ctx.phase = Phase::ActAfterMessages;
  ctx.own_message = *m.message;
  ctx.opponent_declaration = Action::Cooperate;
  const TurnReply a = agent.take_turn(ctx);
  CHECK(a.action.has_value());
  CHECK_FALSE(a.message.has_value());
  CHECK(a.raw.size() == 1);
}
