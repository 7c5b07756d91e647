#pragma once

#include "core/resolvent.hpp"

namespace spa {

// Minimum distance from any principal-symbol eigenvalue to either cut ray,
// scanned over the unit cosphere.
double cut_clearance_scan(const SymbolExpansion& p, const CutPair& cuts, const EngineConfig& cfg);

// Symbol expansion pi ~ sum pi_{-j} of the sectorial projection associated
// with the cut pair; components are per-fiber contour integrals of the
// resolvent parameter symbol.
SymbolExpansion projection_expansion(const SymbolExpansion& p, const CutPair& cuts, int depth,
                                     const EngineConfig& cfg);
SymbolExpansion projection_expansion(const ResolventPtr& res, const CutPair& cuts, int depth);

// True iff no principal eigenvalue has its argument inside the closed sector
// anywhere on the cosphere (the projection is then smoothing).
bool smoothing_check(const SymbolExpansion& p, const CutPair& cuts, const EngineConfig& cfg);

}  // namespace spa
