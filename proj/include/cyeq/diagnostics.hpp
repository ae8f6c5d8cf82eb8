/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

namespace cyeq {

/// Byte span into the original query text, [lo, hi).
struct Span {
  uint32_t lo = 0;
  uint32_t hi = 0;
};

enum class ErrorKind {
  Syntax,
  UndefinedVariable,
  ConflictingRelationshipLabels,
};

struct FrontendError {
  ErrorKind kind = ErrorKind::Syntax;
  Span where;
  std::string message;
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Syntax: return "Syntax";
    case ErrorKind::UndefinedVariable: return "UndefinedVariable";
    case ErrorKind::ConflictingRelationshipLabels: return "ConflictingRelationshipLabels";
  }
  return "?";
}

/// Value-or-error carrier used by the frontend.
template <typename T>
class Result {
 public:
  Result(T value) : data_(std::move(value)) {}          // NOLINT(google-explicit-constructor)
  Result(FrontendError err) : data_(std::move(err)) {}  // NOLINT(google-explicit-constructor)

  bool ok() const { return std::holds_alternative<T>(data_); }
  explicit operator bool() const { return ok(); }

  const T& value() const { return std::get<T>(data_); }
  T& value() { return std::get<T>(data_); }
  const FrontendError& error() const { return std::get<FrontendError>(data_); }

 private:
  std::variant<T, FrontendError> data_;
};

/// Raised while compiling a query feature the algebra does not model.
/// Callers surface it as an Unknown verdict, never as a crash.
struct UnsupportedFeature : std::runtime_error {
  explicit UnsupportedFeature(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cyeq
