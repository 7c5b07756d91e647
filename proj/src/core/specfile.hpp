#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "core/dirac.hpp"
#include "core/verify.hpp"

namespace spa {

using Json = nlohmann::ordered_json;

// Parsed operator-spec file.  kind selects which payload is active.
struct OperatorSpec {
  std::string name = "operator";
  std::string kind = "symbolic";  // symbolic | dirac | matrix
  double volume = 0;              // defaults to (2 pi)^n
  SymbolExpansion symbol;
  bool has_dirac = false;
  CliffordData dirac;
  Matrix matrix;
  std::vector<CutPair> cut_pairs;
  std::vector<int> k_list;
  int depth = 4;
  std::uint64_t seed = 0;
  EngineConfig cfg;
};

OperatorSpec parse_spec(const std::string& json_text);
OperatorSpec parse_spec_file(const std::string& path);

}  // namespace spa
