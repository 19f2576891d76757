#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vardrop {

enum class ErrorKind {
  Parse,
  EmptyInput,
  InsufficientLength,
  Split,
  Parameter,
  Numeric,
  Io,
};

// Coarse category used for CLI exit messages: parse | validation | numeric | io.
std::string_view error_category(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::Parameter, what);
}

}  // namespace vardrop
