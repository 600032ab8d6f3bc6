#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace guifusion {

enum class ErrorCode {
  // app-model parsing
  SyntaxError,
  DuplicateId,
  UnknownReference,
  CapabilityMismatch,
  // interpreter
  UnknownComponent,
  // flow-core
  HistoryHitsCrash,
  EmptyTrace,
  UnknownToken,
  InvalidArgument,
  // reporting
  EmptySteps,
  UnresolvedComponent,
  // maintenance
  AppMismatch,
  EmptyOwnershipMap,
  // service
  UnknownApp,
  UnknownSession,
  UnknownReport,
  UnknownScreenshot,
  SessionClosed,
  InvalidStep,
  EmptyHistory,
  Io,
};

std::string_view error_name(ErrorCode code);

// Every failure the library reports carries a machine-readable code; the
// service maps codes to HTTP status categories and the CLI to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failures additionally carry where in the document the first
// violated rule was found: "line:column" for syntax errors, a JSON pointer
// for structural and semantic ones.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::string location, const std::string& message)
      : Error(code, location + ": " + message), location_(std::move(location)) {}

  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

}  // namespace guifusion
