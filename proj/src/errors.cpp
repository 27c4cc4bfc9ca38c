#include "koopgen/errors.hpp"

#include <iostream>

namespace koopgen {

namespace {

void default_warning(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

WarningHandler g_warning_handler = &default_warning;

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input: return "input error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::integration: return "integration error";
    case ErrorKind::degenerate_data: return "degenerate-data error";
    case ErrorKind::tuning: return "tuning error";
    case ErrorKind::numerical: return "numerical error";
    case ErrorKind::conditioning: return "conditioning error";
    case ErrorKind::rank_gap: return "rank-gap error";
    case ErrorKind::domain: return "domain error";
  }
  return "error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input:
    case ErrorKind::parameter:
    case ErrorKind::validation:
      return 2;
    default:
      return 3;
  }
}

void set_warning_handler(WarningHandler handler) {
  g_warning_handler = handler ? handler : &default_warning;
}

void warn(const std::string& message) { g_warning_handler(message); }

}  // namespace koopgen
