#include "core/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace spa {

namespace {

std::vector<MIdx> midx_with_total(int nvars, int total) {
  std::vector<MIdx> out;
  MIdx cur{0, 0, 0, 0};
  std::function<void(int, int)> rec = [&](int from, int left) {
    if (from == nvars - 1) {
      cur[from] = left;
      out.push_back(cur);
      cur[from] = 0;
      return;
    }
    for (int d = left; d >= 0; --d) {
      cur[from] = d;
      rec(from + 1, left - d);
    }
    cur[from] = 0;
  };
  if (nvars == 0) {
    if (total == 0) out.push_back(cur);
    return out;
  }
  rec(0, total);
  return out;
}

double ipow_signed(int base, int e) {
  double r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

double Freq::pow_alpha(const MIdx& alpha) const {
  double r = 1;
  for (int i = 0; i < 4; ++i) {
    if (alpha[i] == 0) continue;
    if (k[i] == 0) return 0.0;
    r *= ipow_signed(k[i], alpha[i]);
  }
  return r;
}

int Freq::max_abs() const {
  int m = 0;
  for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(k[i]));
  return m;
}

MIdx EvalCtx::to_jet(const MIdx& xi_alpha) const {
  MIdx out{0, 0, 0, 0};
  for (int coord = 0; coord < 4; ++coord) {
    if (xi_alpha[coord] == 0) continue;
    auto it = std::find(dirs.begin(), dirs.end(), coord);
    if (it == dirs.end())
      fail(ErrorCode::OrderExceeded, "xi-derivative requested in a direction without jet variables");
    out[it - dirs.begin()] = xi_alpha[coord];
  }
  return out;
}

EvalCtx make_ctx(const Eigen::VectorXd& xi, const EngineConfig& cfg, std::vector<int> dirs) {
  EvalCtx ctx;
  ctx.xi = xi;
  ctx.cfg = &cfg;
  std::sort(dirs.begin(), dirs.end());
  dirs.erase(std::unique(dirs.begin(), dirs.end()), dirs.end());
  ctx.dirs = std::move(dirs);
  return ctx;
}

const MatrixJet& XiExpr::cached(EvalCtx& ctx, int order) const {
  XiExprPtr key = shared_from_this();
  auto it = ctx.cache.find(key);
  if (it != ctx.cache.end() && it->second.plan->order >= order) return it->second;
  MatrixJet j = jet(ctx, order);
  auto [pos, inserted] = ctx.cache.insert_or_assign(std::move(key), std::move(j));
  return pos->second;
}

namespace {

MatrixJet eval_exact(const XiExpr& e, EvalCtx& ctx, int order) {
  const MatrixJet& best = e.cached(ctx, order);
  if (best.plan->order == order) return best;
  return best.truncated(ctx.plan(order));
}

class TermExpr final : public XiExpr {
 public:
  TermExpr(Matrix c, MIdx mono, int w) : coeff_(std::move(c)), mono_(mono), w_(w) {}

  MatrixJet jet(EvalCtx& ctx, int order) const override {
    const JetPlan* plan = ctx.plan(order);
    int n = static_cast<int>(ctx.xi.size());
    auto coord_jet = [&](int i) {
      auto it = std::find(ctx.dirs.begin(), ctx.dirs.end(), i);
      if (it == ctx.dirs.end()) return ScalarJet::constant(plan, ctx.xi[i]);
      return ScalarJet::variable(plan, ctx.xi[i], static_cast<int>(it - ctx.dirs.begin()));
    };
    ScalarJet s = ScalarJet::constant(plan, 1.0);
    for (int i = 0; i < n; ++i)
      if (mono_[i] > 0) s = s * pow_half_integer(coord_jet(i), 2 * mono_[i]);
    if (w_ != 0) {
      ScalarJet norm2 = ScalarJet::constant(plan, 0.0);
      for (int i = 0; i < n; ++i) {
        ScalarJet xi = coord_jet(i);
        norm2 = norm2 + xi * xi;
      }
      s = s * pow_half_integer(norm2, w_);
    }
    return s * MatrixJet::constant(plan, coeff_);
  }

  std::optional<int> poly_degree() const override {
    if (coeff_.isZero(0.0)) return -1;
    if (w_ >= 0 && w_ % 2 == 0) return midx_total(mono_) + w_;
    return std::nullopt;
  }

  XiExprPtr adjoint_of() const { return std::make_shared<TermExpr>(coeff_.adjoint(), mono_, w_); }

  const Matrix coeff_;
  const MIdx mono_;
  const int w_;
};

class SumExpr final : public XiExpr {
 public:
  SumExpr(std::vector<std::pair<Cplx, XiExprPtr>> t, int rows, int cols)
      : terms_(std::move(t)), rows_(rows), cols_(cols) {}

  MatrixJet jet(EvalCtx& ctx, int order) const override {
    MatrixJet out(ctx.plan(order), rows_, cols_);
    for (const auto& [coef, child] : terms_) add_scaled(out, coef, eval_exact(*child, ctx, order));
    return out;
  }

  std::optional<int> poly_degree() const override {
    int d = -1;
    for (const auto& [coef, child] : terms_) {
      auto pd = child->poly_degree();
      if (!pd) return std::nullopt;
      d = std::max(d, *pd);
    }
    return d;
  }

  bool lambda_dependent() const override {
    for (const auto& [coef, child] : terms_)
      if (child->lambda_dependent()) return true;
    return false;
  }

  void collect_dirs(std::set<int>& dirs) const override {
    for (const auto& [coef, child] : terms_) child->collect_dirs(dirs);
  }

  const std::vector<std::pair<Cplx, XiExprPtr>> terms_;
  const int rows_, cols_;
};

class ProdExpr final : public XiExpr {
 public:
  ProdExpr(XiExprPtr a, XiExprPtr b) : a_(std::move(a)), b_(std::move(b)) {}

  MatrixJet jet(EvalCtx& ctx, int order) const override {
    return eval_exact(*a_, ctx, order) * eval_exact(*b_, ctx, order);
  }

  std::optional<int> poly_degree() const override {
    auto da = a_->poly_degree(), db = b_->poly_degree();
    if (!da || !db) return std::nullopt;
    if (*da < 0 || *db < 0) return -1;
    return *da + *db;
  }

  bool lambda_dependent() const override {
    return a_->lambda_dependent() || b_->lambda_dependent();
  }

  void collect_dirs(std::set<int>& dirs) const override {
    a_->collect_dirs(dirs);
    b_->collect_dirs(dirs);
  }

  const XiExprPtr a_, b_;
};

class DeriveExpr final : public XiExpr {
 public:
  DeriveExpr(XiExprPtr a, MIdx alpha) : a_(std::move(a)), alpha_(alpha) {}

  MatrixJet jet(EvalCtx& ctx, int order) const override {
    int extra = midx_total(alpha_);
    if (order + extra > ctx.cfg->max_deriv_order)
      fail(ErrorCode::OrderExceeded, "requested xi-derivative order beyond the engine maximum");
    MatrixJet inner = eval_exact(*a_, ctx, order + extra);
    return inner.derivative(ctx.to_jet(alpha_));
  }

  std::optional<int> poly_degree() const override {
    auto d = a_->poly_degree();
    if (!d) return std::nullopt;
    return *d - midx_total(alpha_);
  }

  bool lambda_dependent() const override { return a_->lambda_dependent(); }

  void collect_dirs(std::set<int>& dirs) const override {
    for (int i = 0; i < 4; ++i)
      if (alpha_[i] > 0) dirs.insert(i);
    a_->collect_dirs(dirs);
  }

  const XiExprPtr a_;
  const MIdx alpha_;
};

class InverseExpr final : public XiExpr {
 public:
  explicit InverseExpr(XiExprPtr a) : a_(std::move(a)) {}

  MatrixJet jet(EvalCtx& ctx, int order) const override {
    return inverse(eval_exact(*a_, ctx, order), ctx.cfg->singular_floor);
  }

  bool lambda_dependent() const override { return a_->lambda_dependent(); }

  void collect_dirs(std::set<int>& dirs) const override { a_->collect_dirs(dirs); }

  const XiExprPtr a_;
};

}  // namespace

XiExprPtr make_term(const Matrix& coeff, const MIdx& mono, int norm_power) {
  return std::make_shared<TermExpr>(coeff, mono, norm_power);
}

XiExprPtr make_const(const Matrix& coeff) { return make_term(coeff, {0, 0, 0, 0}, 0); }

XiExprPtr make_sum(std::vector<std::pair<Cplx, XiExprPtr>> terms, int rows, int cols) {
  if (terms.size() == 1 && terms[0].first == Cplx(1, 0)) return terms[0].second;
  return std::make_shared<SumExpr>(std::move(terms), rows, cols);
}

XiExprPtr make_prod(XiExprPtr a, XiExprPtr b) {
  return std::make_shared<ProdExpr>(std::move(a), std::move(b));
}

XiExprPtr make_derive(XiExprPtr a, const MIdx& alpha) {
  if (midx_total(alpha) == 0) return a;
  return std::make_shared<DeriveExpr>(std::move(a), alpha);
}

XiExprPtr make_inverse(XiExprPtr a) { return std::make_shared<InverseExpr>(std::move(a)); }

XiExprPtr adjoint_expr(const XiExprPtr& a) {
  if (auto t = std::dynamic_pointer_cast<const TermExpr>(a)) return t->adjoint_of();
  if (auto s = std::dynamic_pointer_cast<const SumExpr>(a)) {
    std::vector<std::pair<Cplx, XiExprPtr>> terms;
    for (const auto& [coef, child] : s->terms_)
      terms.emplace_back(std::conj(coef), adjoint_expr(child));
    return std::make_shared<SumExpr>(std::move(terms), s->cols_, s->rows_);
  }
  if (auto p = std::dynamic_pointer_cast<const ProdExpr>(a))
    return make_prod(adjoint_expr(p->b_), adjoint_expr(p->a_));
  if (auto d = std::dynamic_pointer_cast<const DeriveExpr>(a))
    return std::make_shared<DeriveExpr>(adjoint_expr(d->a_), d->alpha_);
  if (auto inv = std::dynamic_pointer_cast<const InverseExpr>(a))
    return make_inverse(adjoint_expr(inv->a_));
  fail(ErrorCode::ComputationError, "adjoint not available for contour-integral expressions");
}

bool HomogeneousComponent::is_polynomial() const {
  for (const auto& [f, e] : modes)
    if (!e->poly_degree()) return false;
  return true;
}

Matrix HomogeneousComponent::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                                  const EngineConfig& cfg) const {
  Matrix out = Matrix::Zero(fiber_dim, fiber_dim);
  std::set<int> dirs;
  for (const auto& [f, e] : modes) e->collect_dirs(dirs);
  EvalCtx ctx = make_ctx(xi, cfg, {dirs.begin(), dirs.end()});
  for (const auto& [f, e] : modes) {
    double phase = 0;
    for (int i = 0; i < torus_dim; ++i) phase += f.k[i] * x[i];
    out += std::polar(1.0, phase) * e->value(ctx);
  }
  return out;
}

Matrix HomogeneousComponent::eval_mode(const Freq& f, const Eigen::VectorXd& xi,
                                       const EngineConfig& cfg) const {
  auto it = modes.find(f);
  if (it == modes.end()) return Matrix::Zero(fiber_dim, fiber_dim);
  std::set<int> dirs;
  it->second->collect_dirs(dirs);
  EvalCtx ctx = make_ctx(xi, cfg, {dirs.begin(), dirs.end()});
  return it->second->value(ctx);
}

void HomogeneousComponent::add_mode(const Freq& f, Cplx coef, const XiExprPtr& e) {
  auto it = modes.find(f);
  if (it == modes.end()) {
    if (coef == Cplx(1, 0))
      modes[f] = e;
    else
      modes[f] = make_sum({{coef, e}}, fiber_dim, fiber_dim);
  } else {
    modes[f] = make_sum({{Cplx(1, 0), it->second}, {coef, e}}, fiber_dim, fiber_dim);
  }
}

const HomogeneousComponent* SymbolExpansion::component_of_degree(int d) const {
  int j = order - d;
  if (j < 0 || j > depth()) return nullptr;
  return &components[j];
}

bool SymbolExpansion::has_x_dependence() const {
  for (const auto& c : components)
    for (const auto& [f, e] : c.modes)
      if (!f.is_zero()) return true;
  return false;
}

std::vector<int> SymbolExpansion::active_x_dirs() const {
  std::array<bool, 4> active{false, false, false, false};
  for (const auto& c : components)
    for (const auto& [f, e] : c.modes)
      for (int i = 0; i < 4; ++i)
        if (f.k[i] != 0) active[i] = true;
  std::vector<int> out;
  for (int i = 0; i < 4; ++i)
    if (active[i]) out.push_back(i);
  return out;
}

std::set<Freq> SymbolExpansion::freq_support() const {
  std::set<Freq> s;
  for (const auto& c : components)
    for (const auto& [f, e] : c.modes) s.insert(f);
  return s;
}

int SymbolExpansion::max_frequency() const {
  int m = 0;
  for (const auto& c : components)
    for (const auto& [f, e] : c.modes) m = std::max(m, f.max_abs());
  return m;
}

SymbolExpansion identity_expansion(int n, int r) {
  SymbolExpansion s;
  s.order = 0;
  s.fiber_dim = r;
  s.torus_dim = n;
  s.exact_beyond = true;
  HomogeneousComponent c;
  c.degree = 0;
  c.fiber_dim = r;
  c.torus_dim = n;
  c.modes[Freq::zero()] = make_const(Matrix::Identity(r, r));
  s.components.push_back(std::move(c));
  return s;
}

SymbolExpansion single_component_expansion(const HomogeneousComponent& c) {
  SymbolExpansion s;
  s.order = c.degree;
  s.fiber_dim = c.fiber_dim;
  s.torus_dim = c.torus_dim;
  s.exact_beyond = true;
  s.components.push_back(c);
  return s;
}

SymbolExpansion compose(const SymbolExpansion& a, const SymbolExpansion& b, int depth,
                        const EngineConfig& cfg) {
  (void)cfg;
  if (a.torus_dim != b.torus_dim || a.fiber_dim != b.fiber_dim)
    fail(ErrorCode::ComputationError, "composition of symbols on mismatched torus or fiber");
  if (!a.exact_beyond && depth > a.depth())
    fail(ErrorCode::DepthUnavailable, "left factor not available to the requested depth");
  if (!b.exact_beyond && depth > b.depth())
    fail(ErrorCode::DepthUnavailable, "right factor not available to the requested depth");

  const int n = a.torus_dim;
  const int r = a.fiber_dim;
  SymbolExpansion out;
  out.order = a.order + b.order;
  out.fiber_dim = r;
  out.torus_dim = n;

  bool a_poly = true;
  for (const auto& c : a.components) a_poly = a_poly && c.is_polynomial();
  out.exact_beyond = a.exact_beyond && b.exact_beyond && a_poly && depth >= a.order + b.depth();

  for (int l = 0; l <= depth; ++l) {
    HomogeneousComponent comp;
    comp.degree = out.order - l;
    comp.fiber_dim = r;
    comp.torus_dim = n;
    std::map<Freq, std::vector<std::pair<Cplx, XiExprPtr>>> sums;
    for (int j = 0; j <= std::min(l, a.depth()); ++j) {
      for (int k = 0; k <= std::min(l - j, b.depth()); ++k) {
        int rem = l - j - k;
        for (const MIdx& alpha : midx_with_total(n, rem)) {
          double inv_fact = 1.0 / midx_factorial(alpha);
          for (const auto& [ka, ea] : a.components[j].modes) {
            auto pd = ea->poly_degree();
            if (pd && *pd < rem) continue;  // the derivative annihilates this term
            XiExprPtr da = make_derive(ea, alpha);
            for (const auto& [kb, eb] : b.components[k].modes) {
              // (-i)^|a| d_xi^a . d_x^a on e^{i k.x} collapses to k^alpha.
              double scale = kb.pow_alpha(alpha);
              if (scale == 0.0) continue;
              sums[ka + kb].emplace_back(Cplx(inv_fact * scale, 0), make_prod(da, eb));
            }
          }
        }
      }
    }
    for (auto& [f, terms] : sums) comp.modes[f] = make_sum(std::move(terms), r, r);
    out.components.push_back(std::move(comp));
  }
  return out;
}

HomogeneousComponent derive(const HomogeneousComponent& c, const MIdx& alpha_x,
                            const MIdx& alpha_xi, const EngineConfig& cfg) {
  if (midx_total(alpha_xi) > cfg.max_deriv_order)
    fail(ErrorCode::OrderExceeded, "xi-derivative order beyond the engine maximum");
  HomogeneousComponent out;
  out.degree = c.degree - midx_total(alpha_xi);
  out.fiber_dim = c.fiber_dim;
  out.torus_dim = c.torus_dim;
  for (const auto& [f, e] : c.modes) {
    // d_x^alpha on e^{i k.x} multiplies by (i k)^alpha.
    Cplx coef(1, 0);
    bool zero = false;
    for (int i = 0; i < 4; ++i) {
      for (int rep = 0; rep < alpha_x[i]; ++rep) {
        if (f.k[i] == 0) zero = true;
        coef *= Cplx(0, 1) * static_cast<double>(f.k[i]);
      }
    }
    if (zero) continue;
    out.add_mode(f, coef, make_derive(e, alpha_xi));
  }
  return out;
}

SymbolExpansion adjoint_expansion(const SymbolExpansion& a, int depth, const EngineConfig& cfg) {
  (void)cfg;
  if (!a.exact_beyond && depth > a.depth())
    fail(ErrorCode::DepthUnavailable, "adjoint requested beyond the available depth");
  const int n = a.torus_dim;
  const int r = a.fiber_dim;
  SymbolExpansion out;
  out.order = a.order;
  out.fiber_dim = r;
  out.torus_dim = n;
  bool a_poly = true;
  for (const auto& c : a.components) a_poly = a_poly && c.is_polynomial();
  out.exact_beyond = a.exact_beyond && a_poly && depth >= std::max(a.depth(), a.order);

  for (int l = 0; l <= depth; ++l) {
    HomogeneousComponent comp;
    comp.degree = a.order - l;
    comp.fiber_dim = r;
    comp.torus_dim = n;
    std::map<Freq, std::vector<std::pair<Cplx, XiExprPtr>>> sums;
    for (int j = 0; j <= std::min(l, a.depth()); ++j) {
      int rem = l - j;
      for (const MIdx& alpha : midx_with_total(n, rem)) {
        double inv_fact = 1.0 / midx_factorial(alpha);
        for (const auto& [ka, ea] : a.components[j].modes) {
          auto pd = ea->poly_degree();
          if (pd && *pd < rem) continue;
          Freq mu = -ka;  // conjugation flips the frequency
          double scale = mu.pow_alpha(alpha);
          if (scale == 0.0) continue;
          sums[mu].emplace_back(Cplx(inv_fact * scale, 0), make_derive(adjoint_expr(ea), alpha));
        }
      }
    }
    for (auto& [f, terms] : sums) comp.modes[f] = make_sum(std::move(terms), r, r);
    out.components.push_back(std::move(comp));
  }
  return out;
}

std::vector<Eigen::VectorXd> sample_unit_covectors(int n, int count, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < n && static_cast<int>(out.size()) < count; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = 1.0;
    out.push_back(e);
  }
  Eigen::VectorXd d = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  if (static_cast<int>(out.size()) < count) out.push_back(d);
  Rng rng(seed);
  while (static_cast<int>(out.size()) < count) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
    double nrm = v.norm();
    if (nrm < 0.3) continue;
    out.push_back(v / nrm);
  }
  return out;
}

OddClassReport odd_class_check(const SymbolExpansion& a, const EngineConfig& cfg) {
  OddClassReport rep;
  std::vector<Eigen::VectorXd> samples = sample_unit_covectors(a.torus_dim, 10, 0x5eedULL);
  for (int j = 0; j <= a.depth(); ++j) {
    double sign = ((a.order - j) % 2 == 0) ? 1.0 : -1.0;
    for (const auto& [f, e] : a.components[j].modes) {
      std::set<int> dset;
      e->collect_dirs(dset);
      std::vector<int> dirs(dset.begin(), dset.end());
      for (const auto& xi : samples) {
        EvalCtx plus = make_ctx(xi, cfg, dirs);
        EvalCtx minus = make_ctx(-xi, cfg, dirs);
        Matrix v = e->value(minus) - sign * e->value(plus);
        rep.max_violation = std::max(rep.max_violation, v.cwiseAbs().maxCoeff());
      }
    }
  }
  rep.odd_class = rep.max_violation <= cfg.parity_tol;
  return rep;
}

}  // namespace spa
