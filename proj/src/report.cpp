#include "qfisher/report.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qfisher {

void VerificationReport::set(std::string key, double value) {
  auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == key; });
  if (it != values.end()) {
    it->second = value;
  } else {
    values.emplace_back(std::move(key), value);
  }
}

double VerificationReport::at(std::string_view key) const {
  for (const auto& [k, v] : values) {
    if (k == key) return v;
  }
  throw std::out_of_range("report '" + name + "' has no value '" + std::string(key) + "'");
}

bool VerificationReport::contains(std::string_view key) const {
  return std::any_of(values.begin(), values.end(), [&](const auto& kv) { return kv.first == key; });
}

void VerificationReport::fail(std::string reason) {
  passed = false;
  notes.push_back("FAIL: " + std::move(reason));
}

nlohmann::ordered_json VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["verdict"] = passed ? "pass" : "fail";
  nlohmann::ordered_json vals = nlohmann::ordered_json::object();
  for (const auto& [k, v] : values) {
    if (std::isfinite(v)) {
      vals[k] = v;
    } else {
      vals[k] = std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    }
  }
  j["values"] = vals;
  j["notes"] = notes;
  return j;
}

}  // namespace qfisher
