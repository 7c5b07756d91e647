#include "core/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "core/errors.hpp"
#include "core/quadrature.hpp"

namespace spa {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

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

struct GeomClusters {
  std::vector<std::vector<Cplx>> members;
  std::vector<Cplx> centers;
  std::vector<double> radii;
};

GeomClusters geometric_clusters(const std::vector<Cplx>& eigs, double glue) {
  int n = static_cast<int>(eigs.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(eigs[i] - eigs[j]) <= glue) parent[find(i)] = find(j);
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);

  GeomClusters out;
  for (const auto& [root, idx] : groups) {
    std::vector<Cplx> members;
    Cplx c = 0;
    for (int i : idx) {
      members.push_back(eigs[i]);
      c += eigs[i];
    }
    c /= static_cast<double>(idx.size());
    double r = 0;
    for (const Cplx& m : members) r = std::max(r, std::abs(m - c));
    out.members.push_back(std::move(members));
    out.centers.push_back(c);
    out.radii.push_back(r);
  }
  // Deterministic order by centroid.
  std::vector<int> perm(out.centers.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  std::sort(perm.begin(), perm.end(), [&](int a, int b) {
    if (out.centers[a].real() != out.centers[b].real())
      return out.centers[a].real() < out.centers[b].real();
    return out.centers[a].imag() < out.centers[b].imag();
  });
  GeomClusters sorted;
  for (int i : perm) {
    sorted.members.push_back(std::move(out.members[i]));
    sorted.centers.push_back(out.centers[i]);
    sorted.radii.push_back(out.radii[i]);
  }
  return sorted;
}

// Entrywise-compensated accumulator over jet coefficients.
struct JetAccum {
  MatrixJet sum, comp;

  JetAccum(const JetPlan* plan, int rows, int cols) : sum(plan, rows, cols), comp(plan, rows, cols) {}

  void add_scaled(Cplx w, const MatrixJet& v) {
    // v may live on a larger plan; prefix ranks agree.
    for (size_t r = 0; r < sum.c.size(); ++r) {
      Matrix& s = sum.c[r];
      Matrix& cc = comp.c[r];
      const Matrix& add = v.c[r];
      for (Eigen::Index j = 0; j < s.cols(); ++j)
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
          Cplx val = w * add(i, j);
          auto step = [](double& sc, double& co, double vv) {
            double t = sc + vv;
            if (std::abs(sc) >= std::abs(vv))
              co += (sc - t) + vv;
            else
              co += (vv - t) + sc;
            sc = t;
          };
          double sr = s(i, j).real(), si = s(i, j).imag();
          double cr = cc(i, j).real(), ci = cc(i, j).imag();
          step(sr, cr, val.real());
          step(si, ci, val.imag());
          s(i, j) = {sr, si};
          cc(i, j) = {cr, ci};
        }
    }
  }

  MatrixJet value() const {
    MatrixJet out = sum;
    for (size_t r = 0; r < out.c.size(); ++r) out.c[r] += comp.c[r];
    return out;
  }
};

// Truncated product read through the output plan (prefix ranks agree across
// plans with the same variable count).
MatrixJet mul_into(const MatrixJet& a, const MatrixJet& b, const JetPlan* out_plan) {
  MatrixJet out(out_plan, a.rows(), b.cols());
  for (int k = 0; k < out_plan->size(); ++k)
    for (const auto& [ia, ib] : out_plan->conv[k]) out.c[k].noalias() += a.c[ia] * b.c[ib];
  return out;
}

}  // namespace

EllipticityReport ellipticity_scan(const SymbolExpansion& p, const EngineConfig& cfg) {
  const int n = p.torus_dim;
  int res = cfg.scan_nodes_per_axis;
  CosphereGrid grid;
  if (n == 2)
    grid = cosphere_grid(2, res);
  else if (n == 3)
    grid = cosphere_grid(3, res, res);
  else
    grid = cosphere_grid(4, std::min(res, 20), std::min(res, 20), std::min(res, 20));

  const HomogeneousComponent& pm = p.components[0];
  EllipticityReport rep;
  rep.min_singular = std::numeric_limits<double>::infinity();
  rep.min_abs_eig = std::numeric_limits<double>::infinity();
  rep.scan_points = grid.size();
  for (const auto& omega : grid.points) {
    Matrix a = pm.eval_mode(Freq::zero(), omega, cfg);
    Eigen::JacobiSVD<Matrix> svd(a);
    rep.min_singular = std::min(rep.min_singular, svd.singularValues().minCoeff());
    for (const Cplx& ev : eigenvalues_of(a))
      rep.min_abs_eig = std::min(rep.min_abs_eig, std::abs(ev));
  }
  rep.elliptic = rep.min_singular >= cfg.ellipticity_floor;
  return rep;
}

ResolventExpansion::ResolventExpansion(SymbolExpansion p, EngineConfig cfg)
    : p_(std::move(p)), cfg_(cfg) {
  if (p_.components.empty()) fail(ErrorCode::ComputationError, "empty symbol expansion");
  for (const auto& [f, e] : p_.components[0].modes)
    if (!f.is_zero())
      fail(ErrorCode::ComputationError,
           "resolvent recursion requires an x-independent principal symbol");
  if (p_.components[0].modes.empty())
    fail(ErrorCode::NotElliptic, "zero principal symbol");
}

const EllipticityReport& ResolventExpansion::ellipticity() const {
  if (!ellipticity_) {
    auto rep = std::make_unique<EllipticityReport>(ellipticity_scan(p_, cfg_));
    if (!rep->elliptic)
      fail(ErrorCode::NotElliptic, "principal symbol fails the cosphere ellipticity certificate");
    ellipticity_ = std::move(rep);
  }
  return *ellipticity_;
}

void ResolventExpansion::build_terms(int j) const {
  while (static_cast<int>(terms_.size()) <= j) {
    int jj = static_cast<int>(terms_.size());
    std::vector<RecTerm> list;
    if (jj > 0) {
      // |alpha| + k + l = j, l != j.
      for (int l = 0; l < jj; ++l) {
        for (int k = 0; k + l <= jj; ++k) {
          int a_total = jj - k - l;
          if (k > p_.depth()) {
            if (!p_.exact_beyond)
              fail(ErrorCode::DepthUnavailable, "input symbol too shallow for resolvent depth");
            continue;  // exactly zero component
          }
          for (const MIdx& alpha : midx_with_total(p_.torus_dim, a_total))
            list.push_back({alpha, k, l, 1.0 / midx_factorial(alpha)});
        }
      }
    }
    terms_.push_back(std::move(list));

    std::set<Freq> support;
    if (jj == 0) {
      support.insert(Freq::zero());
    } else {
      for (const RecTerm& t : terms_[jj]) {
        for (const auto& [kp, pe] : p_.components[t.k].modes) {
          auto pd = pe->poly_degree();
          if (pd && *pd < midx_total(t.alpha)) continue;
          for (const Freq& kq : mode_support_[t.l]) {
            if (kq.pow_alpha(t.alpha) == 0.0) continue;
            support.insert(kp + kq);
          }
        }
      }
    }
    mode_support_.emplace_back(support.begin(), support.end());
  }
}

const std::vector<Freq>& ResolventExpansion::mode_support(int j) const {
  build_terms(j);
  return mode_support_[j];
}

namespace {

// Per-fiber, lambda-independent data for the recursion.
struct FiberPrep {
  // p-component mode jets at full order, per k.
  std::vector<std::map<Freq, MatrixJet>> pfull;
  // Pre-derived p jets per (j, term, p-mode), truncated to the level order.
  // Keyed (j, term_index, freq).
  std::map<std::tuple<int, int, Freq>, MatrixJet> dp;
};

}  // namespace

void ResolventExpansion::set_depth_hint(int max_j) const {
  int cur = depth_hint_.load();
  while (max_j > cur && !depth_hint_.compare_exchange_weak(cur, max_j)) {
  }
}

void ResolventExpansion::set_budget_hint(int budget) const {
  int cur = budget_hint_.load();
  while (budget > cur && !budget_hint_.compare_exchange_weak(cur, budget)) {
  }
}

const ResolventExpansion::ClusterIntegrals& ResolventExpansion::cluster_integrals(
    EvalCtx& ctx, int max_j, int budget) const {
  max_j = std::max(max_j, depth_hint_.load());
  budget = std::max({budget, budget_hint_.load(), max_j});
  auto key = static_cast<const void*>(this);
  auto found = ctx.aux.find(key);
  if (found != ctx.aux.end()) {
    auto cached = std::static_pointer_cast<ClusterIntegrals>(found->second);
    if (cached->max_j >= max_j && cached->budget >= budget) return *cached;
    max_j = std::max(max_j, cached->max_j);
    budget = std::max(budget, cached->budget);
  }
  ellipticity();
  build_terms(max_j);

  const int r = p_.fiber_dim;
  const int pstar = std::max(budget, max_j);  // p jets must feed all derivatives
  const JetPlan* full_plan = ctx.plan(pstar);

  auto out = std::make_shared<ClusterIntegrals>();
  out->max_j = max_j;
  out->budget = budget;

  // Lambda-independent preparation.
  FiberPrep prep;
  prep.pfull.resize(p_.depth() + 1);
  for (int k = 0; k <= p_.depth(); ++k)
    for (const auto& [f, e] : p_.components[k].modes)
      prep.pfull[k].emplace(f, e->cached(ctx, pstar).truncated(full_plan));

  std::vector<const JetPlan*> level_plan(max_j + 1);
  for (int j = 0; j <= max_j; ++j) level_plan[j] = ctx.plan(std::max(0, budget - j));

  auto alpha_supported = [&ctx](const MIdx& alpha) {
    for (int i = 0; i < 4; ++i)
      if (alpha[i] > 0 &&
          std::find(ctx.dirs.begin(), ctx.dirs.end(), i) == ctx.dirs.end())
        return false;  // frequencies vanish in that direction, so does D_x^alpha
    return true;
  };

  for (int j = 1; j <= max_j; ++j) {
    const auto& terms = terms_[j];
    for (size_t ti = 0; ti < terms.size(); ++ti) {
      const RecTerm& t = terms[ti];
      if (!alpha_supported(t.alpha)) continue;
      for (const auto& [kp, pj] : prep.pfull[t.k]) {
        // Skip derivatives that annihilate polynomial modes.
        const auto& mode_expr = p_.components[t.k].modes.at(kp);
        auto pd = mode_expr->poly_degree();
        if (pd && *pd < midx_total(t.alpha)) continue;
        MatrixJet d = pj.derivative(ctx.to_jet(t.alpha));
        prep.dp.emplace(std::make_tuple(j, static_cast<int>(ti), kp),
                        d.truncated(level_plan[j]));
      }
    }
  }

  // Spectral clusters of the principal symbol at this fiber.
  Matrix a0 = prep.pfull[0].at(Freq::zero()).value();
  std::vector<Cplx> eigs = eigenvalues_of(a0);
  double scale = 0;
  for (const Cplx& ev : eigs) scale = std::max(scale, std::abs(ev));
  double glue = std::max(cfg_.cluster_tolerance, 0.02 * scale);
  GeomClusters geo = geometric_clusters(eigs, glue);

  const int ncl = static_cast<int>(geo.centers.size());
  out->clusters.resize(ncl);
  out->integrals.assign(ncl, {});

  Matrix id = Matrix::Identity(r, r);
  for (int c = 0; c < ncl; ++c) {
    FiberCluster& fc = out->clusters[c];
    fc.center = geo.centers[c];
    fc.eigenvalues = geo.members[c];
    fc.radius = geo.radii[c];

    double d_ext = std::numeric_limits<double>::infinity();
    for (int c2 = 0; c2 < ncl; ++c2) {
      if (c2 == c) continue;
      for (const Cplx& ev : geo.members[c2]) d_ext = std::min(d_ext, std::abs(ev - fc.center));
    }
    if (!std::isfinite(d_ext)) d_ext = fc.radius + std::max(0.5 * scale, 1e-3);
    if (!(d_ext > fc.radius))
      fail(ErrorCode::ClearanceFailure, "overlapping spectral clusters on a fiber");
    double rho = 0.5 * (fc.radius + d_ext);
    double ratio = std::max(fc.radius / rho, rho / d_ext);
    int nodes;
    if (cfg_.symbol_contour_override > 0) {
      nodes = cfg_.symbol_contour_override;
    } else {
      if (ratio > 0.97)
        fail(ErrorCode::ClearanceFailure, "cannot certify contour quadrature for tight clusters");
      double digits = -std::log(cfg_.contour_tol) + 14.0;  // natural-log digits + margin
      nodes = static_cast<int>(std::ceil(digits / -std::log(std::max(ratio, 0.05))));
      nodes = std::clamp(nodes, cfg_.symbol_contour_min_nodes, cfg_.symbol_contour_max_nodes);
    }
    fc.contour_nodes = nodes;

    // Accumulators per level and mode.
    std::vector<std::map<Freq, JetAccum>> acc(max_j + 1);
    for (int j = 0; j <= max_j; ++j)
      for (const Freq& f : mode_support_[j])
        acc[j].emplace(f, JetAccum(level_plan[j], r, r));

    for (int tnode = 0; tnode < nodes; ++tnode) {
      double phi = 2.0 * kPi * tnode / nodes;
      Cplx e(std::cos(phi), std::sin(phi));
      Cplx lambda = fc.center + rho * e;
      Cplx dlam = Cplx(0, 1) * rho * e * (2.0 * kPi / nodes);

      // Q_0 = (p_m - lambda)^{-1} at full order.
      MatrixJet am = prep.pfull[0].at(Freq::zero()).truncated(full_plan);
      am.c[0] -= lambda * id;
      MatrixJet rfull = inverse(am, cfg_.singular_floor);

      std::vector<std::map<Freq, MatrixJet>> q(max_j + 1);
      q[0].emplace(Freq::zero(), rfull.truncated(level_plan[0]));

      for (int j = 1; j <= max_j; ++j) {
        const JetPlan* plan_j = level_plan[j];
        std::map<Freq, MatrixJet> s;
        const auto& terms = terms_[j];
        for (size_t ti = 0; ti < terms.size(); ++ti) {
          const RecTerm& t = terms[ti];
          for (const auto& [kp, pj] : prep.pfull[t.k]) {
            auto dit = prep.dp.find(std::make_tuple(j, static_cast<int>(ti), kp));
            if (dit == prep.dp.end()) continue;
            const MatrixJet& dp = dit->second;
            for (const auto& [kq, qj] : q[t.l]) {
              double sc = kq.pow_alpha(t.alpha);
              if (sc == 0.0) continue;
              MatrixJet prod = mul_into(dp, qj, plan_j);
              Freq f = kp + kq;
              auto it = s.find(f);
              if (it == s.end()) {
                MatrixJet z(plan_j, r, r);
                add_scaled(z, Cplx(t.inv_fact * sc, 0), prod);
                s.emplace(f, std::move(z));
              } else {
                add_scaled(it->second, Cplx(t.inv_fact * sc, 0), prod);
              }
            }
          }
        }
        for (auto& [f, sj] : s) {
          MatrixJet qj = mul_into(rfull, sj, plan_j);
          for (auto& mat : qj.c) mat = -mat;
          q[j].emplace(f, std::move(qj));
        }
      }

      // pi_{-j} = (-1/2 i pi) \oint q_{-m-j}: weight by -dlam/(2 i pi).
      Cplx w = dlam * Cplx(0, 1) / (2.0 * kPi);  // -1/(2 i pi) = i/(2 pi)
      for (int j = 0; j <= max_j; ++j)
        for (auto& [f, qj] : q[j]) {
          auto it = acc[j].find(f);
          if (it != acc[j].end()) it->second.add_scaled(w, qj);
        }
    }

    out->integrals[c].resize(max_j + 1);
    for (int j = 0; j <= max_j; ++j)
      for (auto& [f, a] : acc[j]) out->integrals[c][j].emplace(f, a.value());
  }

  ctx.aux[key] = out;
  return *out;
}

std::vector<std::map<Freq, MatrixJet>> ResolventExpansion::component_jets(EvalCtx& ctx,
                                                                            int max_j, int budget,
                                                                            Cplx lambda) const {
  build_terms(max_j);
  const int r = p_.fiber_dim;
  const int pstar = std::max(budget, max_j);
  const JetPlan* full_plan = ctx.plan(pstar);

  std::vector<std::map<Freq, MatrixJet>> pfull(p_.depth() + 1);
  for (int k = 0; k <= p_.depth(); ++k)
    for (const auto& [f, e] : p_.components[k].modes)
      pfull[k].emplace(f, e->cached(ctx, pstar).truncated(full_plan));

  Matrix a0 = pfull[0].at(Freq::zero()).value();
  for (const Cplx& ev : eigenvalues_of(a0))
    if (std::abs(ev - lambda) < 1e-12 * std::max(1.0, std::abs(ev)))
      fail(ErrorCode::LambdaOnSpectrum, "lambda coincides with a principal eigenvalue");

  MatrixJet am = pfull[0].at(Freq::zero());
  am.c[0] -= lambda * Matrix::Identity(r, r);
  MatrixJet rfull = inverse(am, cfg_.singular_floor);

  std::vector<std::map<Freq, MatrixJet>> q(max_j + 1);
  q[0].emplace(Freq::zero(), rfull.truncated(ctx.plan(std::max(0, budget))));
  for (int jj = 1; jj <= max_j; ++jj) {
    const JetPlan* plan_j = ctx.plan(std::max(0, budget - jj));
    std::map<Freq, MatrixJet> s;
    for (const RecTerm& t : terms_[jj]) {
      bool supported = true;
      for (int i = 0; i < 4; ++i)
        if (t.alpha[i] > 0 &&
            std::find(ctx.dirs.begin(), ctx.dirs.end(), i) == ctx.dirs.end())
          supported = false;
      if (!supported) continue;
      for (const auto& [kp, pj] : pfull[t.k]) {
        const auto& mode_expr = p_.components[t.k].modes.at(kp);
        auto pd = mode_expr->poly_degree();
        if (pd && *pd < midx_total(t.alpha)) continue;
        MatrixJet dp = pj.derivative(ctx.to_jet(t.alpha));
        for (const auto& [kq, qj] : q[t.l]) {
          double sc = kq.pow_alpha(t.alpha);
          if (sc == 0.0) continue;
          MatrixJet prod = mul_into(dp, qj, plan_j);
          auto it = s.find(kp + kq);
          if (it == s.end()) {
            MatrixJet z(plan_j, r, r);
            add_scaled(z, Cplx(t.inv_fact * sc, 0), prod);
            s.emplace(kp + kq, std::move(z));
          } else {
            add_scaled(it->second, Cplx(t.inv_fact * sc, 0), prod);
          }
        }
      }
    }
    for (auto& [f, sj] : s) {
      MatrixJet qj = mul_into(rfull, sj, plan_j);
      for (auto& mat : qj.c) mat = -mat;
      q[jj].emplace(f, std::move(qj));
    }
  }
  return q;
}

std::map<Freq, Matrix> ResolventExpansion::component_modes(int j, const Eigen::VectorXd& xi,
                                                           Cplx lambda) const {
  EvalCtx ctx = make_ctx(xi, cfg_, required_dirs(p_));
  auto q = component_jets(ctx, j, 0, lambda);
  std::map<Freq, Matrix> out;
  for (const auto& [f, qj] : q[j]) out.emplace(f, qj.value());
  return out;
}

Matrix ResolventExpansion::component_value(int j, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& xi, Cplx lambda) const {
  std::map<Freq, Matrix> modes = component_modes(j, xi, lambda);
  Matrix out = Matrix::Zero(p_.fiber_dim, p_.fiber_dim);
  for (const auto& [f, m] : modes) {
    double phase = 0;
    for (int i = 0; i < p_.torus_dim; ++i) phase += f.k[i] * x[i];
    out += std::polar(1.0, phase) * m;
  }
  return out;
}

ResolventPtr make_resolvent(const SymbolExpansion& p, const EngineConfig& cfg) {
  return std::make_shared<ResolventExpansion>(p, cfg);
}

namespace {

class SectorIntegralExpr final : public XiExpr {
 public:
  SectorIntegralExpr(ResolventPtr res, int j, Freq mode, CutPair cuts)
      : res_(std::move(res)), j_(j), mode_(mode), cuts_(cuts) {}

  MatrixJet jet(EvalCtx& ctx, int order) const override {
    const auto& batch = res_->cluster_integrals(ctx, j_, order + j_);
    const int r = res_->fiber_dim();
    MatrixJet out(ctx.plan(order), r, r);

    double scale = 0;
    for (const auto& cl : batch.clusters)
      for (const Cplx& ev : cl.eigenvalues) scale = std::max(scale, std::abs(ev));
    double ray_clear = std::max(1e-10, 1e-7 * scale);

    for (size_t c = 0; c < batch.clusters.size(); ++c) {
      const auto& cl = batch.clusters[c];
      int inside = 0;
      for (const Cplx& ev : cl.eigenvalues) {
        if (cuts_.ray_distance(ev) < ray_clear)
          fail(ErrorCode::EigenvalueOnCut, "principal eigenvalue on a cut ray");
        if (cuts_.sector_contains(ev)) ++inside;
      }
      if (inside == 0) continue;
      if (inside != static_cast<int>(cl.eigenvalues.size()))
        fail(ErrorCode::EigenvalueOnCut,
             "spectral cluster straddles the sector boundary at a fiber");
      const auto& modes = batch.integrals[c][j_];
      auto it = modes.find(mode_);
      if (it == modes.end()) continue;
      // Prefix ranks agree; read through the output plan.
      for (size_t k = 0; k < out.c.size(); ++k) out.c[k] += it->second.c[k];
    }
    return out;
  }

  void collect_dirs(std::set<int>& dirs) const override {
    for (int d : required_dirs(res_->input())) dirs.insert(d);
    for (int d : res_->input().active_x_dirs()) dirs.insert(d);
  }

  const ResolventPtr res_;
  const int j_;
  const Freq mode_;
  const CutPair cuts_;
};

}  // namespace

XiExprPtr make_sector_integral(ResolventPtr resolvent, int j, Freq mode, CutPair cuts) {
  return std::make_shared<SectorIntegralExpr>(std::move(resolvent), j, mode, cuts);
}

namespace {

class ResolventComponentExpr final : public XiExpr {
 public:
  ResolventComponentExpr(ResolventPtr res, int j, Freq mode, Cplx lambda)
      : res_(std::move(res)), j_(j), mode_(mode), lambda_(lambda) {}

  MatrixJet jet(EvalCtx& ctx, int order) const override {
    auto q = res_->component_jets(ctx, j_, order + j_, lambda_);
    auto it = q[j_].find(mode_);
    if (it == q[j_].end()) return MatrixJet(ctx.plan(order), res_->fiber_dim(), res_->fiber_dim());
    return it->second.truncated(ctx.plan(order));
  }

  bool lambda_dependent() const override { return true; }

  void collect_dirs(std::set<int>& dirs) const override {
    for (int d : required_dirs(res_->input())) dirs.insert(d);
  }

  const ResolventPtr res_;
  const int j_;
  const Freq mode_;
  const Cplx lambda_;
};

}  // namespace

XiExprPtr make_resolvent_component(ResolventPtr resolvent, int j, Freq mode, Cplx lambda) {
  return std::make_shared<ResolventComponentExpr>(std::move(resolvent), j, mode, lambda);
}

SymbolExpansion power_expansion(const SymbolExpansion& p, int k, int depth,
                                const EngineConfig& cfg) {
  const int n = p.torus_dim;
  const int r = p.fiber_dim;
  if (k == 0) return identity_expansion(n, r);

  if (k < 0) {
    // P^{-k} = P^{|k|}: repeated composition of p with itself.
    SymbolExpansion out = p;
    for (int i = 1; i < -k; ++i) out = compose(out, p, depth, cfg);
    return out;
  }

  EllipticityReport rep = ellipticity_scan(p, cfg);
  if (!rep.elliptic)
    fail(ErrorCode::NotElliptic, "power expansion requires an elliptic principal symbol");
  for (const auto& [f, e] : p.components[0].modes)
    if (!f.is_zero())
      fail(ErrorCode::ComputationError, "parametrix requires an x-independent principal symbol");

  // Parametrix b with p # b = 1 mod depth.
  const int m = p.order;
  XiExprPtr b0 = make_inverse(p.components[0].modes.at(Freq::zero()));
  SymbolExpansion b;
  b.order = -m;
  b.fiber_dim = r;
  b.torus_dim = n;
  b.exact_beyond = false;

  std::vector<HomogeneousComponent> comps;
  {
    HomogeneousComponent c0;
    c0.degree = -m;
    c0.fiber_dim = r;
    c0.torus_dim = n;
    c0.modes[Freq::zero()] = b0;
    comps.push_back(std::move(c0));
  }
  for (int j = 1; j <= depth; ++j) {
    HomogeneousComponent cj;
    cj.degree = -m - j;
    cj.fiber_dim = r;
    cj.torus_dim = n;
    std::map<Freq, std::vector<std::pair<Cplx, XiExprPtr>>> sums;
    for (int l = 0; l < j; ++l) {
      for (int kk = 0; kk + l <= j; ++kk) {
        int a_total = j - kk - l;
        if (kk > p.depth()) {
          if (!p.exact_beyond)
            fail(ErrorCode::DepthUnavailable, "input symbol too shallow for parametrix depth");
          continue;
        }
        for (const MIdx& alpha : midx_with_total(n, a_total)) {
          double inv_fact = 1.0 / midx_factorial(alpha);
          for (const auto& [kp, pe] : p.components[kk].modes) {
            auto pd = pe->poly_degree();
            if (pd && *pd < a_total) continue;
            XiExprPtr dp = make_derive(pe, alpha);
            for (const auto& [kq, be] : comps[l].modes) {
              double sc = kq.pow_alpha(alpha);
              if (sc == 0.0) continue;
              sums[kp + kq].emplace_back(Cplx(inv_fact * sc, 0), make_prod(dp, be));
            }
          }
        }
      }
    }
    for (auto& [f, terms] : sums) {
      XiExprPtr s = make_sum(std::move(terms), r, r);
      cj.modes[f] = make_sum({{Cplx(-1, 0), make_prod(b0, s)}}, r, r);
    }
    comps.push_back(std::move(cj));
  }
  b.components = std::move(comps);

  SymbolExpansion out = b;
  for (int i = 1; i < k; ++i) out = compose(out, b, depth, cfg);
  return out;
}

void collect_required_dirs(const XiExprPtr& e, std::set<int>& dirs) { e->collect_dirs(dirs); }

std::vector<int> required_dirs(const SymbolExpansion& s) {
  std::set<int> dirs;
  for (const auto& c : s.components)
    for (const auto& [f, e] : c.modes) e->collect_dirs(dirs);
  for (int d : s.active_x_dirs()) dirs.insert(d);
  return {dirs.begin(), dirs.end()};
}

}  // namespace spa
