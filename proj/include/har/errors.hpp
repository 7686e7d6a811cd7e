#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace har {

/// Error categories. Each maps to a distinct process exit code in the CLI.
enum class ErrorKind {
  Domain,         // value outside its documented range (activity id, subset name)
  Parse,          // malformed log, dataset or config text
  Extrapolation,  // resample query outside stream support
  Alignment,      // streams do not overlap in time
  EmptySeries,    // nothing left after NULL removal
  Shape,          // tensor or window shape mismatch
  Numeric,        // non-finite values where finite ones are required
  Format,         // bad magic, unsupported version, truncated container
  Split,          // cross-validation cannot be formed
  Io,             // missing or unreadable file
  Config,         // bad configuration key or value
};

std::string_view error_kind_name(ErrorKind kind);

/// Process exit code used by the CLI for an error of the given kind.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace har
