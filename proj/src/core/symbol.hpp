#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "core/config.hpp"
#include "core/jets.hpp"

namespace spa {

// Frequency multi-index on the torus lattice Z^n, n <= 4.
struct Freq {
  std::array<int, 4> k{0, 0, 0, 0};

  static Freq zero() { return {}; }
  bool operator<(const Freq& o) const { return k < o.k; }
  bool operator==(const Freq& o) const { return k == o.k; }
  Freq operator+(const Freq& o) const {
    Freq r;
    for (int i = 0; i < 4; ++i) r.k[i] = k[i] + o.k[i];
    return r;
  }
  Freq operator-() const {
    Freq r;
    for (int i = 0; i < 4; ++i) r.k[i] = -k[i];
    return r;
  }
  bool is_zero() const { return k == std::array<int, 4>{0, 0, 0, 0}; }
  // k^alpha with 0^0 = 1; this is D_x^alpha acting on e^{i k.x}.
  double pow_alpha(const MIdx& alpha) const;
  int max_abs() const;
};

class XiExpr;
using XiExprPtr = std::shared_ptr<const XiExpr>;

// Per-fiber evaluation context: base covector, active jet directions, caches.
struct EvalCtx {
  Eigen::VectorXd xi;
  const EngineConfig* cfg = nullptr;
  std::vector<int> dirs;  // xi coordinates carrying jet variables, ascending

  const JetPlan* plan(int order) const {
    return JetPlan::get(static_cast<int>(dirs.size()), order);
  }
  // Map a xi-coordinate multi-index onto jet variables; throws OrderExceeded
  // if alpha touches a direction without a jet variable.
  MIdx to_jet(const MIdx& xi_alpha) const;

  // Keyed by owning pointer: holding the node alive keeps addresses unique.
  std::map<XiExprPtr, MatrixJet> cache;
  // Opaque per-context state for contour-integral families.
  std::map<const void*, std::shared_ptr<void>> aux;
};

EvalCtx make_ctx(const Eigen::VectorXd& xi, const EngineConfig& cfg, std::vector<int> dirs = {});

// Matrix-valued function of xi, positively homogeneous of a fixed degree;
// nodes form an immutable DAG evaluated through truncated Taylor jets.
class XiExpr : public std::enable_shared_from_this<XiExpr> {
 public:
  virtual ~XiExpr() = default;
  // Jet at ctx.xi with the given total order (plan from ctx.dirs).
  virtual MatrixJet jet(EvalCtx& ctx, int order) const = 0;
  // Polynomial degree in xi when the node is polynomial (negative: identically
  // zero); nullopt for genuinely non-polynomial nodes.
  virtual std::optional<int> poly_degree() const { return std::nullopt; }
  virtual bool lambda_dependent() const { return false; }
  // Union of xi directions in which evaluation may request derivatives.
  virtual void collect_dirs(std::set<int>& dirs) const { (void)dirs; }

  Matrix value(EvalCtx& ctx) const { return cached(ctx, 0).value(); }
  // Cache-aware evaluation: keeps the highest-order jet seen per node.
  const MatrixJet& cached(EvalCtx& ctx, int order) const;
};

// C . xi^e . |xi|^w  (w any integer; odd powers go through sqrt(|xi|^2)).
XiExprPtr make_term(const Matrix& coeff, const MIdx& mono, int norm_power);
XiExprPtr make_const(const Matrix& coeff);
XiExprPtr make_sum(std::vector<std::pair<Cplx, XiExprPtr>> terms, int rows, int cols);
XiExprPtr make_prod(XiExprPtr a, XiExprPtr b);
XiExprPtr make_derive(XiExprPtr a, const MIdx& alpha);
XiExprPtr make_inverse(XiExprPtr a);
// Conjugate-transpose of the matrix value (xi is real); fails on contour nodes.
XiExprPtr adjoint_expr(const XiExprPtr& a);

// One positively homogeneous matrix symbol component: finite x-Fourier sum
// with xi-expression coefficients.
struct HomogeneousComponent {
  int degree = 0;
  int fiber_dim = 1;
  int torus_dim = 2;
  std::map<Freq, XiExprPtr> modes;

  bool is_zero() const { return modes.empty(); }
  bool is_polynomial() const;
  Matrix eval(const Eigen::VectorXd& x, const Eigen::VectorXd& xi, const EngineConfig& cfg) const;
  Matrix eval_mode(const Freq& f, const Eigen::VectorXd& xi, const EngineConfig& cfg) const;
  void add_mode(const Freq& f, Cplx coef, const XiExprPtr& e);
};

// Truncated polyhomogeneous expansion: components of degrees
// order, order-1, ..., order-depth.
struct SymbolExpansion {
  int order = 0;
  int fiber_dim = 1;
  int torus_dim = 2;
  // True when every component below the stored depth vanishes identically
  // (inputs are finite sums, so they qualify).
  bool exact_beyond = false;
  std::vector<HomogeneousComponent> components;

  int depth() const { return static_cast<int>(components.size()) - 1; }
  const HomogeneousComponent& component(int j) const { return components[j]; }
  // Component of the given homogeneity degree; nullptr when absent (exactly
  // zero for exact expansions, DepthUnavailable otherwise).
  const HomogeneousComponent* component_of_degree(int d) const;
  bool has_x_dependence() const;
  std::vector<int> active_x_dirs() const;
  std::set<Freq> freq_support() const;
  int max_frequency() const;
};

SymbolExpansion identity_expansion(int n, int r);
// Expansion with the given leading component only.
SymbolExpansion single_component_expansion(const HomogeneousComponent& c);

// Asymptotic product a # b down to the given depth.
SymbolExpansion compose(const SymbolExpansion& a, const SymbolExpansion& b, int depth,
                        const EngineConfig& cfg = {});

// d_x^alpha_x d_xi^alpha_xi of one component (x-derivatives land on the
// Fourier data, xi-derivatives on the expression graph).
HomogeneousComponent derive(const HomogeneousComponent& c, const MIdx& alpha_x,
                            const MIdx& alpha_xi, const EngineConfig& cfg = {});

// Formal adjoint symbol to the given depth.
SymbolExpansion adjoint_expansion(const SymbolExpansion& a, int depth,
                                  const EngineConfig& cfg = {});

struct OddClassReport {
  bool odd_class = false;
  double max_violation = 0.0;
};

// Checks a_{m-j}(x,-xi) = (-1)^{m-j} a_{m-j}(x,xi) on sampled unit fibers.
OddClassReport odd_class_check(const SymbolExpansion& a, const EngineConfig& cfg = {});

// Deterministic sample of unit covectors used by parity/homogeneity checks.
std::vector<Eigen::VectorXd> sample_unit_covectors(int n, int count, std::uint64_t seed);

}  // namespace spa
