#include <doctest.h>

#include <map>

#include "core/rng.hpp"
#include "core/symbol.hpp"

using namespace spa;

namespace {

const EngineConfig cfg{};

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Matrix sigma(int i) {
  Matrix m(2, 2);
  if (i == 1)
    m << 0, 1, 1, 0;
  else if (i == 2)
    m << 0, Cplx(0, -1), Cplx(0, 1), 0;
  else
    m << 1, 0, 0, -1;
  return m;
}

Matrix scalar1(Cplx v) { return Matrix::Constant(1, 1, v); }

// Scalar symbol |xi|^2 on T^2.
SymbolExpansion laplace_symbol() {
  HomogeneousComponent c;
  c.degree = 2;
  c.fiber_dim = 1;
  c.torus_dim = 2;
  c.modes[Freq::zero()] = make_term(scalar1(1.0), {0, 0, 0, 0}, 2);
  return single_component_expansion(c);
}

SymbolExpansion dirac2_symbol() {
  HomogeneousComponent c;
  c.degree = 1;
  c.fiber_dim = 2;
  c.torus_dim = 2;
  c.modes[Freq::zero()] =
      make_sum({{1.0, make_term(sigma(1), {1, 0, 0, 0}, 0)}, {1.0, make_term(sigma(2), {0, 1, 0, 0}, 0)}},
               2, 2);
  return single_component_expansion(c);
}

// Trigonometric-polynomial operator application: Op(p) acting on scalar trig
// polynomials, exact for polynomial symbols.  Independent of compose().
using TrigPoly = std::map<Freq, Cplx>;

TrigPoly apply_op(const SymbolExpansion& p, const TrigPoly& u) {
  TrigPoly out;
  for (const auto& [ku, cu] : u) {
    Eigen::VectorXd xi(p.torus_dim);
    for (int i = 0; i < p.torus_dim; ++i) xi[i] = ku.k[i];
    for (const auto& comp : p.components)
      for (const auto& [km, e] : comp.modes)
        out[km + ku] += comp.eval_mode(km, xi, cfg)(0, 0) * cu;
  }
  return out;
}

double poly_dist(const TrigPoly& a, const TrigPoly& b) {
  double d = 0;
  std::set<Freq> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  for (const Freq& k : keys) {
    Cplx va = a.count(k) ? a.at(k) : 0.0;
    Cplx vb = b.count(k) ? b.at(k) : 0.0;
    d = std::max(d, std::abs(va - vb));
  }
  return d;
}

SymbolExpansion random_trig_symbol(Rng& rng, int n, int order, int depth, bool odd_class) {
  SymbolExpansion s;
  s.order = order;
  s.fiber_dim = 1;
  s.torus_dim = n;
  s.exact_beyond = true;
  for (int j = 0; j <= depth; ++j) {
    HomogeneousComponent c;
    c.degree = order - j;
    c.fiber_dim = 1;
    c.torus_dim = n;
    std::vector<Freq> freqs{Freq::zero()};
    for (int i = 0; i < n; ++i) {
      Freq f;
      f.k[i] = 1;
      freqs.push_back(f);
      freqs.push_back(-f);
    }
    for (const Freq& f : freqs) {
      std::vector<std::pair<Cplx, XiExprPtr>> terms;
      for (int t = 0; t < 2; ++t) {
        MIdx e{0, 0, 0, 0};
        int deg = c.degree;
        // Choose monomial degree matching the parity constraint when odd-class.
        int mono_total = std::abs(deg) % 2;
        if (!odd_class) mono_total = rng.uniform_int(0, 1);
        if (mono_total > 0) e[rng.uniform_int(0, n - 1)] = 1;
        int w = deg - (e[0] + e[1] + e[2] + e[3]);
        if (odd_class && w % 2 != 0) continue;
        terms.emplace_back(rng.complex_in_box(1.0), make_term(scalar1(1.0), e, w));
      }
      if (!terms.empty()) c.modes[f] = make_sum(std::move(terms), 1, 1);
    }
    s.components.push_back(std::move(c));
  }
  return s;
}

double component_distance(const HomogeneousComponent& a, const HomogeneousComponent& b,
                          const std::vector<Eigen::VectorXd>& pts) {
  double d = 0;
  std::set<Freq> keys;
  for (const auto& [k, v] : a.modes) keys.insert(k);
  for (const auto& [k, v] : b.modes) keys.insert(k);
  for (const Freq& k : keys)
    for (const auto& xi : pts) {
      Matrix va = a.eval_mode(k, xi, cfg);
      Matrix vb = b.eval_mode(k, xi, cfg);
      if (va.size() == 0) va = Matrix::Zero(vb.rows(), vb.cols());
      if (vb.size() == 0) vb = Matrix::Zero(va.rows(), va.cols());
      d = std::max(d, (va - vb).cwiseAbs().maxCoeff());
    }
  return d;
}

}  // namespace

TEST_CASE("component evaluation: norm squared and direction ratios") {
  SymbolExpansion lap = laplace_symbol();
  Matrix v = lap.components[0].eval(vec2(0.3, 0.7), vec2(3, 4), cfg);
  CHECK(std::abs(v(0, 0) - 25.0) < 1e-13);

  HomogeneousComponent ratio;
  ratio.degree = 0;
  ratio.fiber_dim = 1;
  ratio.torus_dim = 2;
  ratio.modes[Freq::zero()] = make_term(scalar1(1.0), {1, 0, 0, 0}, -1);  // xi1/|xi|
  CHECK(std::abs(ratio.eval(vec2(0, 0), vec2(0, 1), cfg)(0, 0)) < 1e-15);
}

TEST_CASE("resolvent-style inverse node at a fiber") {
  // (sigma.xi - 3)^{-1} at xi = (1,0) equals (sigma_1 + 3)/(1 - 9).
  SymbolExpansion d = dirac2_symbol();
  XiExprPtr shifted = make_sum(
      {{1.0, d.components[0].modes.at(Freq::zero())}, {1.0, make_const(-3.0 * Matrix::Identity(2, 2))}},
      2, 2);
  XiExprPtr inv = make_inverse(shifted);
  EvalCtx ctx = make_ctx(vec2(1, 0), cfg);
  Matrix expect = (sigma(1) + 3.0 * Matrix::Identity(2, 2)) / (1.0 - 9.0);
  CHECK((inv->value(ctx) - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("positive homogeneity is exact under dyadic dilation") {
  HomogeneousComponent c;
  c.degree = -1;
  c.fiber_dim = 2;
  c.torus_dim = 2;
  c.modes[Freq::zero()] =
      make_sum({{Cplx(0.3, -0.2), make_term(sigma(1), {1, 0, 0, 0}, -2)},
                {Cplx(1.1, 0.4), make_term(sigma(3), {1, 1, 0, 0}, -3)}},
               2, 2);
  Eigen::VectorXd xi = vec2(0.375, -1.25);  // dyadic coordinates
  Matrix at1 = c.eval_mode(Freq::zero(), xi, cfg);
  Matrix at2 = c.eval_mode(Freq::zero(), 2 * xi, cfg);
  Matrix athalf = c.eval_mode(Freq::zero(), 0.5 * xi, cfg);
  CHECK((at2 - 0.5 * at1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((athalf - 2.0 * at1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Euler identity at sampled fibers") {
  HomogeneousComponent c;
  c.degree = -3;
  c.fiber_dim = 1;
  c.torus_dim = 3;
  c.modes[Freq::zero()] = make_term(scalar1(1.0), {1, 1, 0, 0}, -5);
  for (const auto& xi : sample_unit_covectors(3, 6, 99)) {
    EvalCtx ctx = make_ctx(xi, cfg, {0, 1, 2});
    const XiExprPtr& e = c.modes.at(Freq::zero());
    Cplx val = e->value(ctx)(0, 0);
    Cplx euler = 0;
    for (int i = 0; i < 3; ++i) {
      MIdx alpha{0, 0, 0, 0};
      alpha[i] = 1;
      XiExprPtr de = make_derive(e, alpha);
      euler += xi[i] * de->value(ctx)(0, 0);
    }
    CHECK(std::abs(euler - static_cast<double>(c.degree) * val) < 1e-11);
  }
}

TEST_CASE("x-derivatives act on the Fourier data") {
  // d_x1 of e^{i x1} xi2 is i e^{i x1} xi2.
  HomogeneousComponent c;
  c.degree = 1;
  c.fiber_dim = 1;
  c.torus_dim = 2;
  Freq f;
  f.k[0] = 1;
  c.modes[f] = make_term(scalar1(1.0), {0, 1, 0, 0}, 0);
  HomogeneousComponent d = derive(c, {1, 0, 0, 0}, {0, 0, 0, 0}, cfg);
  Eigen::VectorXd x = vec2(0.4, 0.0), xi = vec2(0.0, 2.5);
  Cplx expect = Cplx(0, 1) * std::polar(1.0, 0.4) * 2.5;
  CHECK(std::abs(d.eval(x, xi, cfg)(0, 0) - expect) < 1e-14);
  CHECK(d.degree == 1);

  HomogeneousComponent dxi = derive(c, {0, 0, 0, 0}, {1, 0, 0, 0}, cfg);
  CHECK(dxi.degree == 0);
  CHECK(std::abs(dxi.eval(x, xi, cfg)(0, 0)) < 1e-15);  // d/dxi1 of xi2
}

TEST_CASE("compose with the identity is exact") {
  Rng rng(5);
  SymbolExpansion b = random_trig_symbol(rng, 2, 1, 2, false);
  SymbolExpansion id = identity_expansion(2, 1);
  SymbolExpansion ab = compose(id, b, 2, cfg);
  SymbolExpansion ba = compose(b, id, 2, cfg);
  auto pts = sample_unit_covectors(2, 5, 7);
  for (int j = 0; j <= 2; ++j) {
    CHECK(component_distance(ab.components[j], b.components[j], pts) < 1e-14);
    CHECK(component_distance(ba.components[j], b.components[j], pts) < 1e-14);
  }
}

TEST_CASE("compose of norm powers collapses to one") {
  HomogeneousComponent inv;
  inv.degree = -2;
  inv.fiber_dim = 1;
  inv.torus_dim = 2;
  inv.modes[Freq::zero()] = make_term(scalar1(1.0), {0, 0, 0, 0}, -2);
  SymbolExpansion c = compose(laplace_symbol(), single_component_expansion(inv), 3, cfg);
  auto pts = sample_unit_covectors(2, 5, 11);
  CHECK(c.order == 0);
  for (const auto& xi : pts) {
    CHECK(std::abs(c.components[0].eval_mode(Freq::zero(), xi, cfg)(0, 0) - 1.0) < 1e-13);
    for (int j = 1; j <= 3; ++j)
      for (const auto& [f, e] : c.components[j].modes) {
        EvalCtx ctx = make_ctx(xi, cfg);
        CHECK(e->value(ctx).cwiseAbs().maxCoeff() < 1e-13);
      }
  }
}

TEST_CASE("composition matches direct operator application on trig polynomials") {
  // a = e^{i x1} xi1, b = xi1 on T^2, u = e^{2 i x1}.
  HomogeneousComponent ca;
  ca.degree = 1;
  ca.fiber_dim = 1;
  ca.torus_dim = 2;
  Freq f1;
  f1.k[0] = 1;
  ca.modes[f1] = make_term(scalar1(1.0), {1, 0, 0, 0}, 0);
  SymbolExpansion a = single_component_expansion(ca);

  HomogeneousComponent cb;
  cb.degree = 1;
  cb.fiber_dim = 1;
  cb.torus_dim = 2;
  cb.modes[Freq::zero()] = make_term(scalar1(1.0), {1, 0, 0, 0}, 0);
  SymbolExpansion b = single_component_expansion(cb);

  SymbolExpansion ab = compose(a, b, 2, cfg);
  TrigPoly u;
  Freq f2;
  f2.k[0] = 2;
  u[f2] = 1.0;

  TrigPoly via_ops = apply_op(a, apply_op(b, u));
  TrigPoly via_symbol = apply_op(ab, u);
  CHECK(poly_dist(via_ops, via_symbol) < 1e-13);

  // And with genuinely mixed x/xi dependence on both sides.
  Rng rng(21);
  SymbolExpansion r1 = random_trig_symbol(rng, 2, 2, 2, false);
  SymbolExpansion r2 = random_trig_symbol(rng, 2, 1, 1, false);
  // Restrict to polynomial components for the quantization oracle.
  bool poly = true;
  for (const auto& comp : r1.components) poly = poly && comp.is_polynomial();
  for (const auto& comp : r2.components) poly = poly && comp.is_polynomial();
  if (poly) {
    SymbolExpansion r12 = compose(r1, r2, 3, cfg);
    TrigPoly w;
    w[f2] = Cplx(0.7, -0.4);
    Freq g;
    g.k[1] = 1;
    w[g] = Cplx(-0.2, 0.9);
    CHECK(poly_dist(apply_op(r1, apply_op(r2, w)), apply_op(r12, w)) < 1e-12);
  }
}

TEST_CASE("first-order composition term matches the hand formula") {
  Rng rng(31);
  SymbolExpansion a = random_trig_symbol(rng, 2, 2, 1, false);
  SymbolExpansion b = random_trig_symbol(rng, 2, 1, 1, false);
  SymbolExpansion ab = compose(a, b, 1, cfg);

  auto pts = sample_unit_covectors(2, 4, 13);
  Eigen::VectorXd x = vec2(0.35, 1.1);
  for (const auto& xi : pts) {
    // sum_i (-i) d_xi_i a_m d_x_i b_m' + a_m b_{m'-1} + a_{m-1} b_m'.
    Cplx hand = 0;
    for (int i = 0; i < 2; ++i) {
      MIdx ax{0, 0, 0, 0}, axi{0, 0, 0, 0};
      ax[i] = 1;
      axi[i] = 1;
      HomogeneousComponent da = derive(a.components[0], {0, 0, 0, 0}, axi, cfg);
      HomogeneousComponent db = derive(b.components[0], ax, {0, 0, 0, 0}, cfg);
      hand += Cplx(0, -1) * da.eval(x, xi, cfg)(0, 0) * db.eval(x, xi, cfg)(0, 0);
    }
    hand += a.components[0].eval(x, xi, cfg)(0, 0) * b.components[1].eval(x, xi, cfg)(0, 0);
    hand += a.components[1].eval(x, xi, cfg)(0, 0) * b.components[0].eval(x, xi, cfg)(0, 0);
    Cplx got = ab.components[1].eval(x, xi, cfg)(0, 0);
    CHECK(std::abs(got - hand) < 1e-12);
  }
}

TEST_CASE("composition is associative at truncation") {
  Rng rng(41);
  SymbolExpansion a = random_trig_symbol(rng, 2, 2, 2, false);
  SymbolExpansion b = random_trig_symbol(rng, 2, 1, 2, false);
  SymbolExpansion c = random_trig_symbol(rng, 2, 1, 2, false);
  SymbolExpansion left = compose(compose(a, b, 2, cfg), c, 2, cfg);
  SymbolExpansion right = compose(a, compose(b, c, 2, cfg), 2, cfg);
  auto pts = sample_unit_covectors(2, 4, 17);
  for (int j = 0; j <= 2; ++j)
    CHECK(component_distance(left.components[j], right.components[j], pts) < 1e-9);
}

TEST_CASE("odd-class check distinguishes the battery") {
  CHECK(odd_class_check(laplace_symbol(), cfg).odd_class);
  CHECK(odd_class_check(dirac2_symbol(), cfg).odd_class);

  HomogeneousComponent c;
  c.degree = 1;
  c.fiber_dim = 1;
  c.torus_dim = 2;
  c.modes[Freq::zero()] = make_term(scalar1(1.0), {0, 0, 0, 0}, 1);  // |xi|
  OddClassReport rep = odd_class_check(single_component_expansion(c), cfg);
  CHECK(!rep.odd_class);
  CHECK(std::abs(rep.max_violation - 2.0) < 1e-12);
}

TEST_CASE("adjoint symbol passes the inner-product pairing oracle") {
  Rng rng(77);
  // Polynomial symbol with x-dependence: a = e^{i x1} xi1 xi2 + xi2^2 + e^{-i x2} xi1.
  SymbolExpansion a;
  a.order = 2;
  a.fiber_dim = 1;
  a.torus_dim = 2;
  a.exact_beyond = true;
  {
    HomogeneousComponent c2;
    c2.degree = 2;
    c2.fiber_dim = 1;
    c2.torus_dim = 2;
    Freq f1;
    f1.k[0] = 1;
    c2.modes[f1] = make_term(scalar1(Cplx(0.8, 0.3)), {1, 1, 0, 0}, 0);
    c2.modes[Freq::zero()] = make_term(scalar1(1.0), {0, 2, 0, 0}, 0);
    HomogeneousComponent c1;
    c1.degree = 1;
    c1.fiber_dim = 1;
    c1.torus_dim = 2;
    Freq f2;
    f2.k[1] = -1;
    c1.modes[f2] = make_term(scalar1(Cplx(-0.1, 1.2)), {1, 0, 0, 0}, 0);
    a.components = {c2, c1};
  }
  SymbolExpansion astar = adjoint_expansion(a, 3, cfg);

  // <Op(a) u, v> = <u, Op(a*) v> with coefficient pairing.
  TrigPoly u, v;
  for (int t = 0; t < 3; ++t) {
    Freq f;
    f.k[0] = rng.uniform_int(-2, 2);
    f.k[1] = rng.uniform_int(-2, 2);
    u[f] = rng.complex_in_box(1.0);
    Freq g;
    g.k[0] = rng.uniform_int(-2, 2);
    g.k[1] = rng.uniform_int(-2, 2);
    v[g] = rng.complex_in_box(1.0);
  }
  TrigPoly au = apply_op(a, u);
  TrigPoly asv = apply_op(astar, v);
  Cplx lhs = 0, rhs = 0;
  std::set<Freq> keys;
  for (const auto& [k, c] : au) keys.insert(k);
  for (const auto& [k, c] : v) keys.insert(k);
  for (const Freq& k : keys) {
    Cplx x1 = au.count(k) ? au.at(k) : 0.0;
    Cplx x2 = v.count(k) ? v.at(k) : 0.0;
    lhs += x1 * std::conj(x2);
  }
  keys.clear();
  for (const auto& [k, c] : u) keys.insert(k);
  for (const auto& [k, c] : asv) keys.insert(k);
  for (const Freq& k : keys) {
    Cplx x1 = u.count(k) ? u.at(k) : 0.0;
    Cplx x2 = asv.count(k) ? asv.at(k) : 0.0;
    rhs += x1 * std::conj(x2);
  }
  CHECK(std::abs(lhs - rhs) < 1e-12);
}
