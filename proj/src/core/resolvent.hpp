#pragma once

#include <atomic>
#include <memory>

#include "core/symbol.hpp"

namespace spa {

struct EllipticityReport {
  double min_singular = 0.0;
  double min_abs_eig = 0.0;
  bool elliptic = false;
  int scan_points = 0;
};

// Scan of the principal symbol over the unit cosphere.
EllipticityReport ellipticity_scan(const SymbolExpansion& p, const EngineConfig& cfg);

// Resolvent parameter-symbol q ~ sum q_{-m-j}(x, xi, lambda) of (p - lambda).
// The principal component must be x-independent: the recursion then stays a
// finite Fourier sum with xi-rational coefficients, matching the component
// data model.  Contour integrals around the per-fiber spectral clusters of
// p_m are computed in batches and cached on the evaluation context.
class ResolventExpansion {
 public:
  ResolventExpansion(SymbolExpansion p, EngineConfig cfg);

  const SymbolExpansion& input() const { return p_; }
  int order() const { return p_.order; }
  int torus_dim() const { return p_.torus_dim; }
  int fiber_dim() const { return p_.fiber_dim; }
  const EngineConfig& config() const { return cfg_; }
  const EllipticityReport& ellipticity() const;

  // Static x-frequency support of q_{-m-j}.
  const std::vector<Freq>& mode_support(int j) const;

  // q_{-m-j} modes at one fiber (LambdaOnSpectrum if lambda sits on the
  // spectrum of the principal symbol there).
  std::map<Freq, Matrix> component_modes(int j, const Eigen::VectorXd& xi, Cplx lambda) const;
  Matrix component_value(int j, const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                         Cplx lambda) const;
  // Jets of q_{-m-j} for j <= max_j at fixed lambda; level j carries total
  // order budget - j.
  std::vector<std::map<Freq, MatrixJet>> component_jets(EvalCtx& ctx, int max_j, int budget,
                                                        Cplx lambda) const;

  struct FiberCluster {
    Cplx center;
    std::vector<Cplx> eigenvalues;
    double radius = 0.0;
    int contour_nodes = 0;
  };

  struct ClusterIntegrals {
    std::vector<FiberCluster> clusters;
    // integrals[c][j]: (-1/2 i pi) \oint q_{-m-j} d lambda around cluster c,
    // one jet per x-frequency, of total order budget - j.
    std::vector<std::vector<std::map<Freq, MatrixJet>>> integrals;
    int max_j = -1;
    int budget = -1;
  };

  // Batch computation, cached per context; grows monotonically in (max_j, budget).
  const ClusterIntegrals& cluster_integrals(EvalCtx& ctx, int max_j, int budget) const;

  // Sizing hints so the first batch on a fiber is already full-size.
  void set_depth_hint(int max_j) const;
  void set_budget_hint(int budget) const;

 private:
  void build_terms(int j) const;

  SymbolExpansion p_;
  EngineConfig cfg_;
  struct RecTerm {
    MIdx alpha;
    int k;
    int l;
    double inv_fact;
  };
  mutable std::vector<std::vector<RecTerm>> terms_;       // per j
  mutable std::vector<std::vector<Freq>> mode_support_;   // per j
  mutable std::unique_ptr<EllipticityReport> ellipticity_;
  mutable std::atomic<int> depth_hint_{0};
  mutable std::atomic<int> budget_hint_{0};
};

using ResolventPtr = std::shared_ptr<ResolventExpansion>;

ResolventPtr make_resolvent(const SymbolExpansion& p, const EngineConfig& cfg);

// pi_{-j} mode node: (-1/2 i pi) contour integral of q_{-m-j} over the
// per-fiber contour isolating the spectral clusters inside the cut sector.
XiExprPtr make_sector_integral(ResolventPtr resolvent, int j, Freq mode, CutPair cuts);

// Lambda-evaluated resolvent component as an expression node (used by the
// composition-identity oracle).
XiExprPtr make_resolvent_component(ResolventPtr resolvent, int j, Freq mode, Cplx lambda);

// Symbol of P^{-k}: repeated composition of p for k <= 0, parametrix powers
// for k > 0; the result carries `depth` components.
SymbolExpansion power_expansion(const SymbolExpansion& p, int k, int depth,
                                const EngineConfig& cfg);

// Jet-direction requirements of an expression tree (union of derivative
// directions, including those used inside contour recursions).
void collect_required_dirs(const XiExprPtr& e, std::set<int>& dirs);
std::vector<int> required_dirs(const SymbolExpansion& s);

}  // namespace spa
