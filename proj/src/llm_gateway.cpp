#include "ipd/llm_gateway.hpp"

#include <algorithm>
#include <regex>
#include <thread>

#include "ipd/errors.hpp"
#include "text_util.hpp"

namespace ipd {

std::string system_template_name(SetupKind setup) {
  return "system_" + std::string(to_string(setup));
}

std::string user_template_name(SetupKind setup, Phase phase) {
  std::string name = "user_" + std::string(to_string(setup));
  if (setup == SetupKind::Setup3) name += phase == Phase::Message ? "_message" : "_action";
  return name;
}

namespace {

void check_phase(SetupKind setup, Phase phase) {
  bool ok = false;
  switch (setup) {
    case SetupKind::Setup1: ok = phase == Phase::Act; break;
    case SetupKind::Setup2: ok = phase == Phase::MessageAndAct; break;
    case SetupKind::Setup3: ok = phase == Phase::Message || phase == Phase::ActAfterMessages; break;
    default: return;  // unknown setups fail on the template lookup
  }
  if (!ok) throw Error(ErrorKind::InvalidArgument, "phase does not belong to " + std::string(to_string(setup)));
}

}  // namespace

Prompts build_prompts(SetupKind setup, Role role, const GameTranscript& transcript,
                      const RoundContext& context, const TemplateSet& templates) {
  check_phase(setup, context.phase);
  const std::string system_name = system_template_name(setup);
  const std::string user_name = user_template_name(setup, context.phase);
  // Fail on a missing template before doing any other work.
  templates.get(system_name);
  templates.get(user_name);

  const PayoffMatrix& m = transcript.matrix;
  const std::map<std::string, std::string> payoff_vars{
      {"years_reward", years_text(m.reward())},
      {"years_sucker", years_text(m.sucker())},
      {"years_temptation", years_text(m.temptation())},
      {"years_punishment", years_text(m.punishment())},
  };
  std::map<std::string, std::string> vars{
      {"rounds_total", std::to_string(transcript.rounds_per_game)},
      {"round", std::to_string(context.round_index)},
      {"payoff_rules", templates.render("payoff_rules", payoff_vars)},
      {"history", history_summary(transcript, role, setup, templates)},
  };
  const bool needs_declaration =
      setup == SetupKind::Setup2 || (setup == SetupKind::Setup3 && context.phase == Phase::ActAfterMessages);
  if (needs_declaration) {
    if (!context.opponent_declaration) {
      throw Error(ErrorKind::MissingMessage, "prompt needs the other player's declared intent");
    }
    vars["opponent_declaration"] = std::string(to_string(*context.opponent_declaration));
  }
  if (setup == SetupKind::Setup3 && context.phase == Phase::ActAfterMessages) {
    if (!context.own_message) throw Error(ErrorKind::MissingMessage, "action phase needs the player's own message");
    vars["own_message"] = std::string(to_string(*context.own_message));
  }
  return Prompts{templates.render(system_name, vars), templates.render(user_name, vars)};
}

Prompts build_prompts(SetupKind setup, Role role, const GameTranscript& transcript,
                      const RoundContext& context) {
  return build_prompts(setup, role, transcript, context, TemplateSet::builtin());
}

namespace {

enum class Label { Message, Action };

struct LabelHit {
  Label label;
  std::size_t start;       // first character of the label
  std::size_t slot_begin;  // just past the colon
  std::size_t slot_end;
};

std::vector<LabelHit> find_labels(std::string_view text) {
  static const std::regex label_re(R"(\b(message|action|decision)[*_ \t]*:)", std::regex::icase);
  std::vector<LabelHit> hits;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), label_re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const std::string word = detail::lower(m.str(1));
    hits.push_back({word == "message" ? Label::Message : Label::Action,
                    static_cast<std::size_t>(m.position(0)),
                    static_cast<std::size_t>(m.position(0) + m.length(0)), 0});
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    std::size_t end = text.find('\n', hits[i].slot_begin);
    if (end == std::string_view::npos) end = text.size();
    if (i + 1 < hits.size()) end = std::min(end, hits[i + 1].start);
    hits[i].slot_end = end;
  }
  return hits;
}

Action read_slot(std::string_view slot, std::string_view what) {
  static const std::regex word_re(R"(\b(cooperate|defect)\b)", std::regex::icase);
  const std::string s(slot);
  bool saw_c = false;
  bool saw_d = false;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), word_re); it != std::sregex_iterator(); ++it) {
    (detail::lower(it->str(1)) == "cooperate" ? saw_c : saw_d) = true;
  }
  if (saw_c && saw_d) {
    throw Error(ErrorKind::AmbiguousDecision, std::string(what) + " slot names both moves: '" + s + "'");
  }
  if (!saw_c && !saw_d) {
    throw Error(ErrorKind::Unparseable, std::string(what) + " slot holds no move: '" + s + "'");
  }
  return saw_c ? Action::Cooperate : Action::Defect;
}

}  // namespace

ParsedAnswer parse_answer(std::string_view raw, bool want_message, bool want_action) {
  const auto hits = find_labels(raw);
  const LabelHit* message = nullptr;
  const LabelHit* action = nullptr;
  for (const LabelHit& h : hits) {
    (h.label == Label::Message ? message : action) = &h;
  }
  ParsedAnswer out;
  std::size_t reasoning_end = raw.size();
  if (want_action) {
    if (action == nullptr) throw Error(ErrorKind::Unparseable, "no ACTION: line in the reply");
    out.action = read_slot(raw.substr(action->slot_begin, action->slot_end - action->slot_begin), "ACTION");
    reasoning_end = std::min(reasoning_end, action->start);
  }
  if (want_message) {
    if (message == nullptr) throw Error(ErrorKind::Unparseable, "no MESSAGE: line in the reply");
    out.message = read_slot(raw.substr(message->slot_begin, message->slot_end - message->slot_begin), "MESSAGE");
    reasoning_end = std::min(reasoning_end, message->start);
  }
  out.reasoning = std::string(detail::trim(raw.substr(0, reasoning_end)));
  return out;
}

Decision parse_decision(std::string_view raw_output, bool expects_message) {
  ParsedAnswer a = parse_answer(raw_output, expects_message, true);
  return Decision{*a.action, a.message, std::move(a.reasoning)};
}

std::string render_decision(const Decision& d) {
  std::string out = d.reasoning;
  if (!out.empty()) out += '\n';
  if (d.message) out += "MESSAGE: " + std::string(to_string(*d.message)) + '\n';
  out += "ACTION: " + std::string(to_string(d.action));
  return out;
}

void AgentBinding::validate() const {
  const auto bad = [](const char* what) { throw Error(ErrorKind::InvalidArgument, what); };
  switch (kind) {
    case BindingKind::Llm:
      if (!endpoint) bad("llm binding needs an endpoint");
      if (script || rule) bad("llm binding carries scripted or rule fields");
      if (steering) steering->validate();
      if (max_retries < 0) bad("max_retries must be non-negative");
      if (decode.max_new_tokens <= 0 || decode.temperature < 0.0) bad("invalid decode parameters");
      break;
    case BindingKind::Scripted:
      if (!script) bad("scripted binding needs a policy");
      if (steering || endpoint || rule) bad("scripted binding carries llm or rule fields");
      break;
    case BindingKind::Rule:
      if (!rule) bad("rule binding needs an opponent spec");
      if (steering || endpoint || script) bad("rule binding carries llm or scripted fields");
      rule->validate();
      break;
  }
}

nlohmann::json SidecarRequest::to_json() const {
  nlohmann::json j;
  j["system"] = system;
  j["user"] = user;
  j["trait"] = trait ? nlohmann::json(std::string(to_string(*trait))) : nlohmann::json(nullptr);
  j["direction"] = direction ? nlohmann::json(*direction > 0 ? "+1" : "-1") : nlohmann::json(nullptr);
  j["coefficient"] = coefficient;
  j["layer_start"] = layer_start;
  j["layer_end"] = layer_end;
  j["seed"] = seed;
  j["max_new_tokens"] = max_new_tokens;
  j["temperature"] = temperature;
  return j;
}

SidecarRequest SidecarRequest::from_json(const nlohmann::json& body) {
  try {
    if (!body.is_object()) throw Error(ErrorKind::ParseError, "request body is not an object");
    SidecarRequest r;
    r.system = body.at("system").get<std::string>();
    r.user = body.at("user").get<std::string>();
    if (body.contains("trait") && !body.at("trait").is_null()) r.trait = parse_trait(body.at("trait").get<std::string>());
    if (body.contains("direction") && !body.at("direction").is_null()) {
      const auto d = body.at("direction").get<std::string>();
      if (d == "+1") {
        r.direction = 1;
      } else if (d == "-1") {
        r.direction = -1;
      } else {
        throw Error(ErrorKind::ParseError, "direction must be \"+1\" or \"-1\"");
      }
    }
    if (r.trait.has_value() != r.direction.has_value()) {
      throw Error(ErrorKind::ParseError, "trait and direction must both be set or both null");
    }
    r.coefficient = body.at("coefficient").get<double>();
    r.layer_start = body.at("layer_start").get<int>();
    r.layer_end = body.at("layer_end").get<int>();
    r.seed = body.at("seed").get<std::uint64_t>();
    r.max_new_tokens = body.at("max_new_tokens").get<int>();
    r.temperature = body.at("temperature").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

nlohmann::json SidecarResponse::to_json() const {
  return {{"text", text}, {"model_id", model_id}, {"steering_applied", steering_applied}};
}

SidecarResponse SidecarResponse::from_json(const nlohmann::json& body) {
  try {
    return SidecarResponse{body.at("text").get<std::string>(), body.at("model_id").get<std::string>(),
                           body.at("steering_applied").get<bool>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SidecarRejected, std::string("malformed sidecar response: ") + e.what());
  }
}

SidecarRequest make_request(const AgentBinding& binding, const Prompts& prompts, std::uint64_t decode_seed) {
  SidecarRequest r;
  r.system = prompts.system;
  r.user = prompts.user;
  if (binding.steering) {
    r.trait = binding.steering->trait;
    r.direction = binding.steering->sign();
    r.coefficient = binding.steering->coefficient;
    r.layer_start = binding.steering->layer_start;
    r.layer_end = binding.steering->layer_end;
  }
  r.seed = decode_seed;
  r.max_new_tokens = binding.decode.max_new_tokens;
  r.temperature = binding.decode.temperature;
  return r;
}

LlmOutcome decide_via_llm(const AgentBinding& binding, const Prompts& prompts, std::uint64_t decode_seed,
                          Phase phase, SidecarClient& client, const TemplateSet& templates) {
  if (binding.kind != BindingKind::Llm) throw Error(ErrorKind::InvalidArgument, "binding is not an llm binding");
  LlmOutcome outcome;
  bool ask_again = false;  // a previous reply failed to parse
  std::string last_failure;
  bool last_was_transport = false;
  for (int attempt = 0; attempt <= binding.max_retries; ++attempt) {
    Prompts p = prompts;
    if (ask_again) p.user += templates.get("retry_suffix");
    SidecarResponse response;
    try {
      response = client.steered_chat(make_request(binding, p, decode_seed));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SidecarUnavailable) throw;
      last_failure = e.what();
      last_was_transport = true;
      if (attempt < binding.max_retries && binding.retry_backoff.count() > 0) {
        std::this_thread::sleep_for(binding.retry_backoff * (attempt + 1));
      }
      continue;
    }
    outcome.raw.push_back(response.text);
    outcome.model_id = response.model_id;
    try {
      outcome.answer = parse_answer(response.text, phase_wants_message(phase), phase_wants_action(phase));
      outcome.retries = attempt;
      return outcome;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Unparseable && e.kind() != ErrorKind::AmbiguousDecision) throw;
      last_failure = e.what();
      last_was_transport = false;
      ask_again = true;
    }
  }
  if (last_was_transport) {
    throw Error(ErrorKind::SidecarUnavailable,
                "after " + std::to_string(binding.max_retries + 1) + " attempts: " + last_failure);
  }
  throw Error(ErrorKind::RetriesExhausted,
              "no usable answer after " + std::to_string(binding.max_retries + 1) + " attempts; last: " + last_failure);
}

LlmOutcome decide_via_llm(const AgentBinding& binding, const Prompts& prompts, std::uint64_t decode_seed,
                          Phase phase, SidecarClient& client) {
  return decide_via_llm(binding, prompts, decode_seed, phase, client, TemplateSet::builtin());
}

LlmAgent::LlmAgent(AgentBinding binding, std::shared_ptr<SidecarClient> client, const TemplateSet& templates)
    : binding_(std::move(binding)), client_(std::move(client)), templates_(&templates) {
  binding_.validate();
  if (!client_) throw Error(ErrorKind::InvalidArgument, "llm agent needs a sidecar client");
}

TurnReply LlmAgent::take_turn(const TurnContext& context) {
  if (context.transcript == nullptr) throw Error(ErrorKind::InvalidArgument, "turn without a transcript");
  const RoundContext round{context.round_index, context.phase, context.opponent_declaration, context.own_message};
  const Prompts prompts = build_prompts(context.setup, context.role, *context.transcript, round, *templates_);
  LlmOutcome outcome = decide_via_llm(binding_, prompts, context.decode_seed, context.phase, *client_, *templates_);
  TurnReply reply;
  reply.action = outcome.answer.action;
  reply.message = outcome.answer.message;
  reply.reasoning = std::move(outcome.answer.reasoning);
  reply.retries = outcome.retries;
  reply.raw = std::move(outcome.raw);
  return reply;
}

}  // namespace ipd
