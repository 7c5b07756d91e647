#pragma once

#include <nlohmann/json.hpp>

#include "core/specfile.hpp"

namespace spa {

// Deterministic result bundle: identical spec + seed gives byte-identical
// JSON and CSV (timings deliberately live outside the report).
struct ExperimentReport {
  std::string name;
  std::string kind;
  Json spec_echo;
  Json extras;  // kind-specific payloads (certificates, projections, ...)
  std::vector<AsymmetryReport> rows;
  std::vector<PropertyResult> properties;

  int failures() const;
  std::string to_json() const;
  std::string to_csv() const;
};

ExperimentReport run_spec(const OperatorSpec& spec);
ExperimentReport verify_report(std::uint64_t seed, const std::string& level,
                               const EngineConfig& cfg);

}  // namespace spa
