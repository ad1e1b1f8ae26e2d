#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdde/linalg.hpp"

namespace sdde {

enum class CheckStatus { PASS, WARN, FAIL };

const char* to_string(CheckStatus s);

/// One offending input of a failed (or warned) check.
struct Counterexample {
  std::string description;
  std::map<std::string, Vec> inputs;
  double value = 0.0;
};

/// Structured result of a property check. Every tolerance the check used is
/// listed explicitly; statistics carry the measured quantities.
struct VerificationReport {
  std::string check;
  CheckStatus status = CheckStatus::PASS;
  std::map<std::string, double> tolerances;
  std::map<std::string, double> statistics;
  std::map<std::string, Vec> series;  // e.g. per-dt violation curves
  std::vector<Counterexample> counterexamples;
  std::vector<std::string> notes;

  bool passed() const { return status == CheckStatus::PASS; }
  bool failed() const { return status == CheckStatus::FAIL; }

  void set_worst(CheckStatus s) {
    if (static_cast<int>(s) > static_cast<int>(status)) status = s;
  }

  /// Canonical JSON: sorted keys, doubles at 17 significant digits.
  std::string to_json() const;
};

}  // namespace sdde
