#include "ipd/errors.hpp"

namespace ipd {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::GameComplete: return "GameComplete";
    case ErrorKind::MissingMessage: return "MissingMessage";
    case ErrorKind::UnexpectedMessage: return "UnexpectedMessage";
    case ErrorKind::ScriptExhausted: return "ScriptExhausted";
    case ErrorKind::WrongOpponent: return "WrongOpponent";
    case ErrorKind::MissingMessages: return "MissingMessages";
    case ErrorKind::IncompleteGame: return "IncompleteGame";
    case ErrorKind::AllUndefined: return "AllUndefined";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TemplateMissing: return "TemplateMissing";
    case ErrorKind::Unparseable: return "Unparseable";
    case ErrorKind::AmbiguousDecision: return "AmbiguousDecision";
    case ErrorKind::SidecarUnavailable: return "SidecarUnavailable";
    case ErrorKind::SidecarRejected: return "SidecarRejected";
    case ErrorKind::RetriesExhausted: return "RetriesExhausted";
    case ErrorKind::PlanMismatch: return "PlanMismatch";
    case ErrorKind::DataError: return "DataError";
  }
  return "Unknown";
}

}  // namespace ipd
