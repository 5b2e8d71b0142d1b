#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace forge {

// Base of every error the toolkit raises. code() is the short machine tag
// used in diagnostics and run manifests ("SyntaxError", "AmbiguousTop", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

  // "code: message", the form written into manifests.
  std::string describe() const { return code_ + ": " + what(); }

 private:
  std::string code_;
};

// Errors that point at a position in a source file.
class LocatedError : public Error {
 public:
  LocatedError(std::string code, std::string file, int line, int col, const std::string& message)
      : Error(std::move(code), message), file_(std::move(file)), line_(line), col_(col) {}

  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }
  int col() const noexcept { return col_; }

  // file:line:col: code: message
  std::string diagnostic() const {
    return file_ + ":" + std::to_string(line_) + ":" + std::to_string(col_) + ": " + code() + ": " + what();
  }

 private:
  std::string file_;
  int line_;
  int col_;
};

class SyntaxError : public LocatedError {
 public:
  SyntaxError(std::string file, int line, int col, const std::string& message)
      : LocatedError("SyntaxError", std::move(file), line, col, message) {}
};

class UnsupportedConstruct : public LocatedError {
 public:
  UnsupportedConstruct(std::string file, int line, int col, std::string construct)
      : LocatedError("UnsupportedConstruct", std::move(file), line, col, "unsupported construct '" + construct + "'"),
        construct_(std::move(construct)) {}

  const std::string& construct() const noexcept { return construct_; }

 private:
  std::string construct_;
};

#define FORGE_SIMPLE_ERROR(Name)                                              \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& message) : Error(#Name, message) {}      \
  }

FORGE_SIMPLE_ERROR(AmbiguousTop);
FORGE_SIMPLE_ERROR(MissingTop);
FORGE_SIMPLE_ERROR(InsertionConflict);
FORGE_SIMPLE_ERROR(InvalidConfig);
FORGE_SIMPLE_ERROR(InvalidReport);
FORGE_SIMPLE_ERROR(NoResources);
FORGE_SIMPLE_ERROR(BackendUnavailable);
FORGE_SIMPLE_ERROR(SpaceExhausted);
FORGE_SIMPLE_ERROR(ZeroDenominator);
FORGE_SIMPLE_ERROR(EmptyInput);
FORGE_SIMPLE_ERROR(EmptySet);
FORGE_SIMPLE_ERROR(LengthMismatch);
FORGE_SIMPLE_ERROR(ZeroActual);
FORGE_SIMPLE_ERROR(SchemaViolation);
FORGE_SIMPLE_ERROR(IncompleteMeta);
FORGE_SIMPLE_ERROR(UnlabeledFront);
FORGE_SIMPLE_ERROR(NoKernels);
FORGE_SIMPLE_ERROR(UnknownPart);

#undef FORGE_SIMPLE_ERROR

// Carries the byte offset where reading stopped.
class OffsetError : public Error {
 public:
  OffsetError(std::string code, std::size_t offset, const std::string& message)
      : Error(std::move(code), message + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class MalformedReport : public OffsetError {
 public:
  MalformedReport(std::size_t offset, const std::string& message) : OffsetError("MalformedReport", offset, message) {}
};

class ParseError : public OffsetError {
 public:
  ParseError(std::size_t offset, const std::string& message) : OffsetError("ParseError", offset, message) {}
};

}  // namespace forge
