#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ipd {

enum class ErrorKind {
  InvalidArgument,
  ParseError,
  InvalidMatrix,
  GameComplete,
  MissingMessage,
  UnexpectedMessage,
  ScriptExhausted,
  WrongOpponent,
  MissingMessages,
  IncompleteGame,
  AllUndefined,
  EmptyInput,
  TemplateMissing,
  Unparseable,
  AmbiguousDecision,
  SidecarUnavailable,
  SidecarRejected,
  RetriesExhausted,
  PlanMismatch,
  DataError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the engine carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ipd
