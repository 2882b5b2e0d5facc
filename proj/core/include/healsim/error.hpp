#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace healsim {

enum class Errc {
  kUnknownSlot,
  kTargetAbsent,
  kInterfaceMismatch,
  kInvalidBlueprint,
  kNoEligibleTarget,
  kClockRegression,
  kSyntaxError,
  kDuplicateRuleName,
  kUnknownStrategy,
  kUnknownField,
  kNoMatchingRule,
  kMalformedFrame,
  kConnectionFailed,
  kTimeout,
  kRemoteError,
  kSubjectUnknown,
  kRestartAbsent,
  kEndpointAbsent,
  kInvalidConfig,
  kIo,
};

std::string_view to_string(Errc code) noexcept;

/// Base of every error thrown by the library. The code is stable and is what
/// callers (and the CLI exit code mapping) switch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Rule text diagnostics carry a 1-based source position.
class RuleSyntaxError : public Error {
 public:
  RuleSyntaxError(Errc code, int line, int column, const std::string& message)
      : Error(code, std::to_string(line) + ":" + std::to_string(column) + ": " +
                        message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace healsim
