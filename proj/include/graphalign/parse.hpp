// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_PARSE_HPP
#define GRAPHALIGN_PARSE_HPP

#include <optional>
#include <string>
#include <vector>

namespace graphalign {

struct ParseDiagnostic {
  enum class Severity { Error, Warning };
  int line = 1;
  int column = 1;
  std::string message;
  Severity severity = Severity::Error;

  std::string str() const {
    std::string s = std::to_string(line) + ":" + std::to_string(column) + ": ";
    s += severity == Severity::Error ? "error: " : "warning: ";
    return s + message;
  }
};

/// Parse output: a value when no error-severity diagnostic was raised,
/// plus whatever diagnostics accumulated along the way.
template <typename T>
struct ParseResult {
  std::optional<T> value;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return value.has_value(); }

  std::string error_text() const {
    std::string s;
    for (const ParseDiagnostic& d : diagnostics) {
      if (!s.empty()) s += '\n';
      s += d.str();
    }
    return s;
  }
};

}  // namespace graphalign

#endif
