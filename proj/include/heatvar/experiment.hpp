#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "heatvar/stats.hpp"

namespace heatvar::experiment {

/// Malformed experiment spec; the message carries the offending field path.
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string field_path, const std::string& what)
      : std::runtime_error(field_path + ": " + what), field_path_(std::move(field_path)) {}
  const std::string& field_path() const { return field_path_; }

 private:
  std::string field_path_;
};

struct RunResult {
  nlohmann::ordered_json report;
  bool all_pass = false;
};

/// Parses and runs a JSON experiment spec. threads_override > 0 replaces the
/// spec's thread count; a shared cache reuses factorizations across runs.
RunResult run_experiment(const nlohmann::json& spec_json, int threads_override = 0,
                         stats::SamplerCache* shared_cache = nullptr);

/// Report with the wall-clock subtree removed, for determinism comparisons.
nlohmann::ordered_json strip_timing(const nlohmann::ordered_json& report);

/// Flat CSV summary: one line per report row.
std::string report_to_csv(const nlohmann::ordered_json& report);

}  // namespace heatvar::experiment
