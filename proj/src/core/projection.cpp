#include "core/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"
#include "core/quadrature.hpp"

namespace spa {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

CosphereGrid scan_grid(int n, const EngineConfig& cfg) {
  int res = cfg.scan_nodes_per_axis;
  if (n == 2) return cosphere_grid(2, res);
  if (n == 3) return cosphere_grid(3, res, res);
  return cosphere_grid(4, std::min(res, 20), std::min(res, 20), std::min(res, 20));
}

}  // namespace

double cut_clearance_scan(const SymbolExpansion& p, const CutPair& cuts, const EngineConfig& cfg) {
  CosphereGrid grid = scan_grid(p.torus_dim, cfg);
  const HomogeneousComponent& pm = p.components[0];
  double min_dist = std::numeric_limits<double>::infinity();
  for (const auto& omega : grid.points) {
    Matrix a = pm.eval_mode(Freq::zero(), omega, cfg);
    for (const Cplx& ev : eigenvalues_of(a))
      min_dist = std::min(min_dist, cuts.ray_distance(ev));
  }
  return min_dist;
}

SymbolExpansion projection_expansion(const ResolventPtr& res, const CutPair& cuts, int depth) {
  const SymbolExpansion& p = res->input();
  const EngineConfig& cfg = res->config();

  res->ellipticity();
  res->set_depth_hint(depth);
  double clearance = cut_clearance_scan(p, cuts, cfg);
  if (clearance < 1e-6)
    fail(ErrorCode::EigenvalueOnCut,
         "principal eigenvalues approach a cut ray on the cosphere scan");

  SymbolExpansion out;
  out.order = 0;
  out.fiber_dim = p.fiber_dim;
  out.torus_dim = p.torus_dim;
  out.exact_beyond = false;
  for (int j = 0; j <= depth; ++j) {
    HomogeneousComponent c;
    c.degree = -j;
    c.fiber_dim = p.fiber_dim;
    c.torus_dim = p.torus_dim;
    for (const Freq& f : res->mode_support(j))
      c.modes[f] = make_sector_integral(res, j, f, cuts);
    out.components.push_back(std::move(c));
  }
  return out;
}

SymbolExpansion projection_expansion(const SymbolExpansion& p, const CutPair& cuts, int depth,
                                     const EngineConfig& cfg) {
  return projection_expansion(make_resolvent(p, cfg), cuts, depth);
}

bool smoothing_check(const SymbolExpansion& p, const CutPair& cuts, const EngineConfig& cfg) {
  CosphereGrid grid = scan_grid(p.torus_dim, cfg);
  const HomogeneousComponent& pm = p.components[0];
  for (const auto& omega : grid.points) {
    Matrix a = pm.eval_mode(Freq::zero(), omega, cfg);
    for (const Cplx& ev : eigenvalues_of(a)) {
      if (cuts.sector_contains(ev)) return false;
      // Closed sector: treat points on the rays as inside.
      double arg = std::arg(ev);
      if (arg < 0) arg += kTwoPi;
      for (double edge : {cuts.theta, cuts.theta_prime}) {
        double e = std::fmod(edge, kTwoPi);
        if (std::abs(arg - e) < 1e-12 || std::abs(arg - e + kTwoPi) < 1e-12 ||
            std::abs(arg - e - kTwoPi) < 1e-12)
          return false;
      }
    }
  }
  return true;
}

}  // namespace spa
