#include "vardrop/error.hpp"

namespace vardrop {

std::string_view error_category(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
      return "parse";
    case ErrorKind::Numeric:
      return "numeric";
    case ErrorKind::Io:
      return "io";
    case ErrorKind::EmptyInput:
    case ErrorKind::InsufficientLength:
    case ErrorKind::Split:
    case ErrorKind::Parameter:
      break;
  }
  return "validation";
}

}  // namespace vardrop
