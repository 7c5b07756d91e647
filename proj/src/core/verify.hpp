#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/dirac.hpp"
#include "core/residue.hpp"
#include "core/rng.hpp"

namespace spa {

struct PropertyResult {
  std::string module;
  std::string name;
  double measured = 0;
  double tolerance = 0;
  bool pass = false;
  int criterion = 0;  // acceptance-criterion number when applicable
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::string level;
  std::vector<PropertyResult> results;
  bool all_pass() const {
    for (const auto& r : results)
      if (!r.pass) return false;
    return true;
  }
};

// Full battery of module property suites.  quick: desk-scale subset (< 1 min);
// full: everything, including the T^3 depth-7 identities (< 15 min).
VerifyReport run_verify(std::uint64_t seed, const std::string& level, const EngineConfig& cfg);

// One module's suite at the full level; module is one of matrix-kernel,
// symbol-core, resolvent-parametrix, sectorial-projection, residue-asymmetry,
// dirac-geometry.
VerifyReport run_suite(const std::string& module, std::uint64_t seed, const EngineConfig& cfg);

// Shared test operators.
SymbolExpansion battery_schroedinger(int n, Rng& rng);
SymbolExpansion battery_dirac_twisted(int n);
SymbolExpansion battery_nonselfadjoint_order1(int n, Rng& rng);
SymbolExpansion battery_t3_even_order(Rng& rng);      // m = 2, odd-class, non-selfadjoint
SymbolExpansion battery_t3_selfadjoint(Rng& rng);     // m = 2, selfadjoint, odd-class
SymbolExpansion battery_abs_xi();                     // |xi| on T^2 (not odd-class)

// Worst Leibniz-rule violation of `composed` against the hand-coded first
// order term of a # b; the mutation fixture feeds a corrupted composition.
double leibniz_violation(const SymbolExpansion& a, const SymbolExpansion& b,
                         const SymbolExpansion& composed, const EngineConfig& cfg);

}  // namespace spa
