//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>
#include <string>

namespace scalelaw {

enum class ErrorKind {
  kInvalidArgument,
  kNotFound,
  kParse,
  kSchema,
  kDegenerateFit,
  kDomain,
  kTooFewPoints,
  kLineSearch,
  kShapeMismatch,
  kIo,
};

const char *error_kind_name(ErrorKind kind);

/// Base exception for every failure raised by the library. The CLI maps any
/// Error to exit status 2.
class Error: public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) { }

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class InvalidArgument: public Error {
public:
  explicit InvalidArgument(const std::string &msg)
      : Error(ErrorKind::kInvalidArgument, msg) { }
};

class NotFound: public Error {
public:
  explicit NotFound(const std::string &msg): Error(ErrorKind::kNotFound, msg) { }
};

class ParseError: public Error {
public:
  ParseError(const std::string &msg, long line)
      : Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + msg),
        line_(line) { }

  long line() const noexcept { return line_; }

private:
  long line_;
};

class SchemaError: public Error {
public:
  SchemaError(const std::string &field, const std::string &msg)
      : Error(ErrorKind::kSchema, "field '" + field + "': " + msg),
        field_(field) { }

  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

class DegenerateFit: public Error {
public:
  explicit DegenerateFit(const std::string &msg)
      : Error(ErrorKind::kDegenerateFit, msg) { }
};

class DomainError: public Error {
public:
  explicit DomainError(const std::string &msg)
      : Error(ErrorKind::kDomain, msg) { }
};

class TooFewPoints: public Error {
public:
  TooFewPoints(const std::string &what, std::size_t have, std::size_t need)
      : Error(ErrorKind::kTooFewPoints,
              what + ": " + std::to_string(have) + " fit points, need at least "
                  + std::to_string(need)),
        have_(have), need_(need) { }

  std::size_t have() const noexcept { return have_; }
  std::size_t need() const noexcept { return need_; }

private:
  std::size_t have_, need_;
};

class ShapeMismatch: public Error {
public:
  explicit ShapeMismatch(const std::string &msg)
      : Error(ErrorKind::kShapeMismatch, msg) { }
};

class IoError: public Error {
public:
  explicit IoError(const std::string &msg): Error(ErrorKind::kIo, msg) { }
};

}  // namespace scalelaw
