#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "ipd/llm_gateway.hpp"
#include "ipd/tournament.hpp"

namespace ipd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitSidecar = 3;

inline constexpr const char* kEndpointEnv = "IPD_SIDECAR_URL";

/// Agent bindings from a plan's "agents" object. Entries are keyed by
/// condition label with "default" as the fallback:
///   {"kind": "llm", "endpoint": URL, "max_retries": 3, "temperature": 1.0,
///    "max_new_tokens": 512}
///   {"kind": "scripted", "policy": "tft"}
/// `endpoint_override` (flag or environment) wins over any configured URL.
AgentBinding binding_for(const nlohmann::json& agents, const Condition& condition,
                         const std::string& endpoint_override);

/// Whether any player condition of the plan resolves to an llm binding.
bool plan_needs_sidecar(const ExperimentPlan& plan, const std::string& endpoint_override);

AgentResolver make_resolver(const ExperimentPlan& plan, const std::string& endpoint_override);

/// Entry point shared by the binary and the tests.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ipd::cli
