#include "core/jets.hpp"

#include <map>
#include <memory>
#include <mutex>

#include "core/errors.hpp"

namespace spa {

namespace {

std::uint32_t pack(const MIdx& m) {
  return static_cast<std::uint32_t>(m[0]) | (static_cast<std::uint32_t>(m[1]) << 8) |
         (static_cast<std::uint32_t>(m[2]) << 16) | (static_cast<std::uint32_t>(m[3]) << 24);
}

void enumerate(int nvars, int degree, int from, MIdx& cur, std::vector<MIdx>& out) {
  if (from == nvars - 1) {
    cur[from] = degree;
    out.push_back(cur);
    cur[from] = 0;
    return;
  }
  for (int d = degree; d >= 0; --d) {
    cur[from] = d;
    enumerate(nvars, degree - d, from + 1, cur, out);
  }
  cur[from] = 0;
}

std::map<std::pair<int, int>, std::unique_ptr<JetPlan>>& plan_cache() {
  static std::map<std::pair<int, int>, std::unique_ptr<JetPlan>> cache;
  return cache;
}

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

int JetPlan::rank_of(const MIdx& m) const {
  if (midx_total(m) > order) return -1;
  auto it = rank.find(pack(m));
  return it == rank.end() ? -1 : it->second;
}

const JetPlan* JetPlan::get(int nvars, int order) {
  if (nvars < 0 || nvars > 4) fail(ErrorCode::OrderExceeded, "jet variables limited to 4");
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto key = std::make_pair(nvars, order);
  auto& cache = plan_cache();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second.get();

  auto plan = std::make_unique<JetPlan>();
  plan->nvars = nvars;
  plan->order = order;
  if (nvars == 0) {
    plan->indices.push_back({0, 0, 0, 0});
  } else {
    MIdx cur{0, 0, 0, 0};
    for (int d = 0; d <= order; ++d) enumerate(nvars, d, 0, cur, plan->indices);
  }
  for (size_t i = 0; i < plan->indices.size(); ++i)
    plan->rank[pack(plan->indices[i])] = static_cast<int>(i);
  plan->conv.resize(plan->indices.size());
  for (size_t ia = 0; ia < plan->indices.size(); ++ia) {
    for (size_t ib = 0; ib < plan->indices.size(); ++ib) {
      MIdx sum;
      for (int v = 0; v < 4; ++v) sum[v] = plan->indices[ia][v] + plan->indices[ib][v];
      if (midx_total(sum) > order) continue;
      int k = plan->rank.at(pack(sum));
      plan->conv[k].emplace_back(static_cast<int>(ia), static_cast<int>(ib));
    }
  }
  const JetPlan* raw = plan.get();
  cache[key] = std::move(plan);
  return raw;
}

double midx_factorial(const MIdx& m) {
  auto f = [](int k) {
    double r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
  };
  return f(m[0]) * f(m[1]) * f(m[2]) * f(m[3]);
}

ScalarJet ScalarJet::constant(const JetPlan* p, Cplx v) {
  ScalarJet j(p);
  j.c[0] = v;
  return j;
}

ScalarJet ScalarJet::variable(const JetPlan* p, Cplx v, int var) {
  ScalarJet j(p);
  j.c[0] = v;
  if (p->order >= 1) {
    MIdx e{0, 0, 0, 0};
    e[var] = 1;
    int r = p->rank_of(e);
    if (r >= 0) j.c[r] = 1.0;
  }
  return j;
}

ScalarJet ScalarJet::truncated(const JetPlan* p) const {
  ScalarJet out(p);
  size_t keep = std::min(out.c.size(), c.size());
  for (size_t i = 0; i < keep; ++i) out.c[i] = c[i];
  return out;
}

ScalarJet operator+(const ScalarJet& a, const ScalarJet& b) {
  ScalarJet out = a;
  for (size_t i = 0; i < out.c.size(); ++i) out.c[i] += b.c[i];
  return out;
}

ScalarJet operator-(const ScalarJet& a, const ScalarJet& b) {
  ScalarJet out = a;
  for (size_t i = 0; i < out.c.size(); ++i) out.c[i] -= b.c[i];
  return out;
}

ScalarJet operator*(const ScalarJet& a, const ScalarJet& b) {
  ScalarJet out(a.plan);
  const auto& conv = a.plan->conv;
  for (size_t k = 0; k < out.c.size(); ++k) {
    Cplx s = 0;
    for (const auto& [ia, ib] : conv[k]) s += a.c[ia] * b.c[ib];
    out.c[k] = s;
  }
  return out;
}

ScalarJet operator*(Cplx s, const ScalarJet& a) {
  ScalarJet out = a;
  for (auto& v : out.c) v *= s;
  return out;
}

namespace {

ScalarJet scalar_recip(const ScalarJet& u) {
  // u = u0 (1 + w): 1/u = u0^{-1} sum (-w)^j.
  Cplx u0 = u.c[0];
  if (u0 == Cplx(0, 0)) fail(ErrorCode::SingularFiber, "reciprocal of zero scalar jet");
  ScalarJet w = (1.0 / u0) * u;
  w.c[0] = 0.0;
  ScalarJet acc = ScalarJet::constant(u.plan, 1.0);
  ScalarJet wp = ScalarJet::constant(u.plan, 1.0);
  for (int j = 1; j <= u.plan->order; ++j) {
    wp = wp * w;
    Cplx sign = (j % 2 == 0) ? 1.0 : -1.0;
    for (size_t i = 0; i < acc.c.size(); ++i) acc.c[i] += sign * wp.c[i];
  }
  return (1.0 / u0) * acc;
}

ScalarJet scalar_sqrt(const ScalarJet& u) {
  Cplx u0 = u.c[0];
  if (u0 == Cplx(0, 0)) fail(ErrorCode::SingularFiber, "sqrt of zero scalar jet");
  ScalarJet w = (1.0 / u0) * u;
  w.c[0] = 0.0;
  ScalarJet acc = ScalarJet::constant(u.plan, 1.0);
  ScalarJet wp = ScalarJet::constant(u.plan, 1.0);
  double binom = 1.0;  // binom(1/2, j)
  for (int j = 1; j <= u.plan->order; ++j) {
    binom *= (0.5 - (j - 1)) / j;
    wp = wp * w;
    for (size_t i = 0; i < acc.c.size(); ++i) acc.c[i] += binom * wp.c[i];
  }
  return std::sqrt(u0) * acc;
}

ScalarJet scalar_ipow(const ScalarJet& u, int k) {
  if (k == 0) return ScalarJet::constant(u.plan, 1.0);
  if (k < 0) return scalar_ipow(scalar_recip(u), -k);
  ScalarJet out = u;
  for (int i = 1; i < k; ++i) out = out * u;
  return out;
}

}  // namespace

ScalarJet pow_half_integer(const ScalarJet& u, int p) {
  if (p % 2 == 0) return scalar_ipow(u, p / 2);
  // p = 2q + 1 with q = (p-1)/2 (also for negative odd p): u^q sqrt(u).
  int q = (p - 1) / 2;
  return scalar_ipow(u, q) * scalar_sqrt(u);
}

MatrixJet MatrixJet::constant(const JetPlan* p, const Matrix& m) {
  MatrixJet j(p, static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  j.c[0] = m;
  return j;
}

MatrixJet MatrixJet::truncated(const JetPlan* p) const {
  MatrixJet out(p, rows(), cols());
  size_t keep = std::min(out.c.size(), c.size());
  for (size_t i = 0; i < keep; ++i) out.c[i] = c[i];
  return out;
}

MatrixJet MatrixJet::derivative(const MIdx& alpha) const {
  int a = midx_total(alpha);
  if (a > plan->order) fail(ErrorCode::OrderExceeded, "derivative order exceeds jet order");
  const JetPlan* p = JetPlan::get(plan->nvars, plan->order - a);
  MatrixJet out(p, rows(), cols());
  for (int k = 0; k < p->size(); ++k) {
    MIdx beta = p->indices[k];
    MIdx src;
    for (int v = 0; v < 4; ++v) src[v] = beta[v] + alpha[v];
    int r = plan->rank_of(src);
    // Taylor coefficient of d^alpha f at beta is c_{alpha+beta} (alpha+beta)!/beta!.
    out.c[k] = c[r] * (midx_factorial(src) / midx_factorial(beta));
  }
  return out;
}

MatrixJet operator+(const MatrixJet& a, const MatrixJet& b) {
  MatrixJet out = a;
  for (size_t i = 0; i < out.c.size(); ++i) out.c[i] += b.c[i];
  return out;
}

MatrixJet operator-(const MatrixJet& a, const MatrixJet& b) {
  MatrixJet out = a;
  for (size_t i = 0; i < out.c.size(); ++i) out.c[i] -= b.c[i];
  return out;
}

MatrixJet operator*(const MatrixJet& a, const MatrixJet& b) {
  MatrixJet out(a.plan, a.rows(), b.cols());
  const auto& conv = a.plan->conv;
  for (size_t k = 0; k < out.c.size(); ++k)
    for (const auto& [ia, ib] : conv[k]) out.c[k].noalias() += a.c[ia] * b.c[ib];
  return out;
}

MatrixJet operator*(const ScalarJet& s, const MatrixJet& a) {
  MatrixJet out(a.plan, a.rows(), a.cols());
  const auto& conv = a.plan->conv;
  for (size_t k = 0; k < out.c.size(); ++k)
    for (const auto& [ia, ib] : conv[k]) out.c[k].noalias() += s.c[ia] * a.c[ib];
  return out;
}

MatrixJet operator*(Cplx s, const MatrixJet& a) {
  MatrixJet out = a;
  for (auto& m : out.c) m *= s;
  return out;
}

void add_in_place(MatrixJet& a, const MatrixJet& b) {
  for (size_t i = 0; i < a.c.size(); ++i) a.c[i] += b.c[i];
}

void add_scaled(MatrixJet& a, Cplx s, const MatrixJet& b) {
  for (size_t i = 0; i < a.c.size(); ++i) a.c[i] += s * b.c[i];
}

MatrixJet inverse(const MatrixJet& a, double sing_floor) {
  const Matrix& a0 = a.c[0];
  Eigen::JacobiSVD<Matrix> svd(a0);
  if (svd.singularValues().minCoeff() < sing_floor)
    fail(ErrorCode::SingularFiber, "matrix-inverse node failed its invertibility certificate");
  Matrix b0 = a0.partialPivLu().solve(Matrix::Identity(a0.rows(), a0.cols()));

  MatrixJet out(a.plan, a.rows(), a.cols());
  out.c[0] = b0;
  // Graded recurrence: B_k = -B_0 sum over conv pairs with the A factor nonconstant.
  const auto& conv = a.plan->conv;
  Matrix tmp(a.rows(), a.cols());
  for (size_t k = 1; k < out.c.size(); ++k) {
    tmp.setZero();
    for (const auto& [ia, ib] : conv[k]) {
      if (ia == 0) continue;
      tmp.noalias() += a.c[ia] * out.c[ib];
    }
    out.c[k].noalias() = -b0 * tmp;
  }
  return out;
}

}  // namespace spa
