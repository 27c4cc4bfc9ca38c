#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace koopgen {

enum class ErrorKind {
  input,           // malformed arguments, dimension mismatch
  parameter,       // parameter outside its admissible range
  validation,      // configuration document rejected
  integration,     // trajectory integration diverged
  degenerate_data, // data cannot support the requested construction
  tuning,          // bandwidth tuning found no usable slope
  numerical,       // NaN contamination, decomposition failure
  conditioning,    // eigenvalue too small to divide by
  rank_gap,        // no spectral gap at the requested rank cut
  domain,          // value outside the domain of a spectral map
};

std::string_view to_string(ErrorKind kind);

/// Exit status used by the command-line driver: 2 for rejected input, 3 for
/// numerical failures.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

/// Runs `fn`, re-throwing any koopgen::Error with `label` prefixed to its message.
template <typename Fn>
decltype(auto) with_stage(const std::string& label, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), label + ": " + e.what());
  }
}

/// Warning sink; defaults to stderr. Replaceable so tests can capture messages.
using WarningHandler = void (*)(const std::string&);
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace koopgen
