#include "ipd/agent.hpp"

#include "ipd/errors.hpp"

namespace ipd {

TurnReply ScriptedAgent::take_turn(const TurnContext& context) {
  if (context.transcript == nullptr) throw Error(ErrorKind::InvalidArgument, "turn without a transcript");
  const std::span<const RoundRecord> history(context.transcript->rounds);
  const Action planned = scripted_action(policy_, context.role, history);

  TurnReply reply;
  reply.reasoning = "scripted:" + policy_.label();
  if (phase_wants_action(context.phase)) reply.action = planned;
  if (phase_wants_message(context.phase)) reply.message = scripted_message(policy_, history, planned);
  return reply;
}

}  // namespace ipd
