#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace qfisher {

/// Named scalar diagnostics of one identity or inequality check, in the order
/// they were recorded, plus a pass/fail verdict.
struct VerificationReport {
  std::string name;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::string> notes;
  bool passed = true;

  VerificationReport() = default;
  explicit VerificationReport(std::string report_name) : name(std::move(report_name)) {}

  /// Insert or overwrite a diagnostic.
  void set(std::string key, double value);
  double at(std::string_view key) const;
  bool contains(std::string_view key) const;

  /// Records a failed requirement; the verdict becomes false.
  void fail(std::string reason);
  void note(std::string text) { notes.push_back(std::move(text)); }

  nlohmann::ordered_json to_json() const;
};

}  // namespace qfisher
