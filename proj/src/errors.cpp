#include "har/errors.hpp"

namespace har {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Extrapolation: return "extrapolation";
    case ErrorKind::Alignment: return "alignment";
    case ErrorKind::EmptySeries: return "empty-series";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Format: return "format";
    case ErrorKind::Split: return "split";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Io: return 3;
    case ErrorKind::Format: return 4;
    case ErrorKind::Shape: return 5;
    case ErrorKind::Parse: return 6;
    case ErrorKind::Domain: return 7;
    case ErrorKind::Extrapolation:
    case ErrorKind::Alignment:
    case ErrorKind::EmptySeries: return 8;
    case ErrorKind::Split: return 9;
    case ErrorKind::Numeric: return 10;
  }
  return 1;
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace har
