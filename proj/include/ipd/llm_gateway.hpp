#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ipd/agent.hpp"
#include "ipd/conditions.hpp"
#include "ipd/game.hpp"
#include "ipd/templates.hpp"

namespace ipd {

struct Prompts {
  std::string system;
  std::string user;
  bool operator==(const Prompts&) const = default;
};

struct RoundContext {
  int round_index = 1;
  Phase phase = Phase::Act;
  std::optional<Action> opponent_declaration;
  std::optional<Action> own_message;
};

/// Renders the system and user prompt for `role` from the template set. The
/// user prompt embeds history_summary() of `transcript`. Setup 2 requires an
/// opponent declaration; Setup 3's action phase requires both messages.
Prompts build_prompts(SetupKind setup, Role role, const GameTranscript& transcript,
                      const RoundContext& context, const TemplateSet& templates);
Prompts build_prompts(SetupKind setup, Role role, const GameTranscript& transcript,
                      const RoundContext& context);

/// Template key for a prompt, e.g. "user_setup3_message".
std::string system_template_name(SetupKind setup);
std::string user_template_name(SetupKind setup, Phase phase);

struct Decision {
  Action action = Action::Cooperate;
  std::optional<Action> message;
  std::string reasoning;
  bool operator==(const Decision&) const = default;
};

/// Labeled answer lines: "MESSAGE: <word>" and "ACTION: <word>" ("DECISION:"
/// is accepted as a synonym for ACTION). Labels are case-insensitive; the
/// last occurrence of each label wins. The slot after a label runs to the
/// end of the line or the next label. Everything before the first used
/// label is the reasoning.
///
/// Throws Unparseable when a required slot is missing or holds no decision
/// word, AmbiguousDecision when a slot holds both words.
Decision parse_decision(std::string_view raw_output, bool expects_message);

struct ParsedAnswer {
  std::optional<Action> action;
  std::optional<Action> message;
  std::string reasoning;
};
ParsedAnswer parse_answer(std::string_view raw_output, bool want_message, bool want_action);

/// Inverse of parse_decision for reasoning without answer labels.
std::string render_decision(const Decision& decision);

struct DecodeParams {
  double temperature = 1.0;
  int max_new_tokens = 512;
};

/// http://host:port[/prefix]
struct Endpoint {
  std::string url = "http://127.0.0.1:8000";
  std::chrono::milliseconds connect_timeout{5000};
  std::chrono::milliseconds read_timeout{300000};
};

enum class BindingKind { Scripted, Rule, Llm };

struct AgentBinding {
  BindingKind kind = BindingKind::Llm;
  std::optional<SteeringSpec> steering;  // Llm; absent = baseline
  std::optional<Endpoint> endpoint;      // Llm
  int max_retries = 3;
  DecodeParams decode;
  std::optional<ScriptedPolicy> script;  // Scripted
  std::optional<OpponentSpec> rule;      // Rule
  std::chrono::milliseconds retry_backoff{250};

  /// Throws InvalidArgument unless exactly the fields for `kind` are set.
  void validate() const;
};

/// Body of POST /v1/steered-chat.
struct SidecarRequest {
  std::string system;
  std::string user;
  std::optional<Trait> trait;
  std::optional<int> direction;  // +1 / -1
  double coefficient = 0.0;
  int layer_start = -20;
  int layer_end = -5;
  std::uint64_t seed = 0;
  int max_new_tokens = 512;
  double temperature = 1.0;

  nlohmann::json to_json() const;
  static SidecarRequest from_json(const nlohmann::json& body);  // throws ParseError
  bool operator==(const SidecarRequest&) const = default;
};

struct SidecarResponse {
  std::string text;
  std::string model_id;
  bool steering_applied = false;

  nlohmann::json to_json() const;
  static SidecarResponse from_json(const nlohmann::json& body);
};

SidecarRequest make_request(const AgentBinding& binding, const Prompts& prompts,
                            std::uint64_t decode_seed);

/// Transport to the steering sidecar.
class SidecarClient {
 public:
  virtual ~SidecarClient() = default;
  /// Throws SidecarUnavailable on connection failure or 5xx, SidecarRejected
  /// on 4xx or a malformed response.
  virtual SidecarResponse steered_chat(const SidecarRequest& request) = 0;
};

class HttpSidecarClient final : public SidecarClient {
 public:
  explicit HttpSidecarClient(Endpoint endpoint);
  ~HttpSidecarClient() override;
  SidecarResponse steered_chat(const SidecarRequest& request) override;

  /// GET /healthz; nullopt when unreachable.
  std::optional<nlohmann::json> health();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct LlmOutcome {
  ParsedAnswer answer;
  int retries = 0;
  std::vector<std::string> raw;  // every reply, in order
  std::string model_id;
};

/// One request per attempt. A reply that fails to parse is retried with the
/// retry suffix appended to the user prompt, up to binding.max_retries times,
/// then RetriesExhausted. Transport failures are retried on the same budget,
/// then SidecarUnavailable. Never returns a default action.
LlmOutcome decide_via_llm(const AgentBinding& binding, const Prompts& prompts,
                          std::uint64_t decode_seed, Phase phase, SidecarClient& client,
                          const TemplateSet& templates);
LlmOutcome decide_via_llm(const AgentBinding& binding, const Prompts& prompts,
                          std::uint64_t decode_seed, Phase phase, SidecarClient& client);

class LlmAgent final : public Agent {
 public:
  LlmAgent(AgentBinding binding, std::shared_ptr<SidecarClient> client,
           const TemplateSet& templates = TemplateSet::builtin());
  TurnReply take_turn(const TurnContext& context) override;

 private:
  AgentBinding binding_;
  std::shared_ptr<SidecarClient> client_;
  const TemplateSet* templates_;
};

}  // namespace ipd
