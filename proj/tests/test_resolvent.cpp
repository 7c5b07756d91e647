#include <doctest.h>

#include "core/errors.hpp"
#include "core/projection.hpp"
#include "core/resolvent.hpp"
#include "core/rng.hpp"

using namespace spa;

namespace {

const EngineConfig cfg{};
constexpr double kPi = 3.141592653589793238462643383279502884;

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

SymbolExpansion laplace_symbol(int n) {
  HomogeneousComponent c;
  c.degree = 2;
  c.fiber_dim = 1;
  c.torus_dim = n;
  c.modes[Freq::zero()] = make_term(scalar1(1.0), {0, 0, 0, 0}, 2);
  return single_component_expansion(c);
}

// |xi|^2 + V(x) with V = 2 cos x1 = e^{i x1} + e^{-i x1}.
SymbolExpansion schroedinger_symbol() {
  SymbolExpansion s = laplace_symbol(2);
  HomogeneousComponent c1;  // zero degree-1 component
  c1.degree = 1;
  c1.fiber_dim = 1;
  c1.torus_dim = 2;
  HomogeneousComponent c0;
  c0.degree = 0;
  c0.fiber_dim = 1;
  c0.torus_dim = 2;
  Freq f;
  f.k[0] = 1;
  c0.modes[f] = make_const(scalar1(1.0));
  c0.modes[-f] = make_const(scalar1(1.0));
  s.components.push_back(std::move(c1));
  s.components.push_back(std::move(c0));
  return s;
}

SymbolExpansion dirac2_symbol() {
  HomogeneousComponent c;
  c.degree = 1;
  c.fiber_dim = 2;
  c.torus_dim = 2;
  c.modes[Freq::zero()] = make_sum(
      {{1.0, make_term(sigma(1), {1, 0, 0, 0}, 0)}, {1.0, make_term(sigma(2), {0, 1, 0, 0}, 0)}}, 2,
      2);
  return single_component_expansion(c);
}

// Dirac with a trigonometric potential: sigma.xi + sigma_1 cos x2.
SymbolExpansion dirac2_twisted() {
  SymbolExpansion s = dirac2_symbol();
  HomogeneousComponent c0;
  c0.degree = 0;
  c0.fiber_dim = 2;
  c0.torus_dim = 2;
  Freq f;
  f.k[1] = 1;
  c0.modes[f] = make_const(0.5 * sigma(1));
  c0.modes[-f] = make_const(0.5 * sigma(1));
  s.components.push_back(std::move(c0));
  return s;
}

}  // namespace

TEST_CASE("resolvent of the Laplacian is a single component") {
  ResolventPtr res = make_resolvent(laplace_symbol(2), cfg);
  Cplx lambda(-1.0, 0.7);
  Eigen::VectorXd xi = vec2(0.8, -0.6);
  auto q0 = res->component_modes(0, xi, lambda);
  CHECK(std::abs(q0.at(Freq::zero())(0, 0) - 1.0 / (1.0 - lambda)) < 1e-14);
  for (int j = 1; j <= 3; ++j) {
    auto qj = res->component_modes(j, xi, lambda);
    for (const auto& [f, m] : qj) CHECK(m.cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("Dirac resolvent matches the Clifford closed form") {
  ResolventPtr res = make_resolvent(dirac2_symbol(), cfg);
  Cplx lambda(0.3, 1.1);
  for (const auto& xi : sample_unit_covectors(2, 5, 3)) {
    auto q0 = res->component_modes(0, xi, lambda);
    Matrix sx = sigma(1) * xi[0] + sigma(2) * xi[1];
    double n2 = xi.squaredNorm();
    Matrix expect = (sx + lambda * Matrix::Identity(2, 2)) / (n2 - lambda * lambda);
    CHECK((q0.at(Freq::zero()) - expect).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("Schroedinger resolvent: hand-derived low components") {
  ResolventPtr res = make_resolvent(schroedinger_symbol(), cfg);
  Cplx lambda(-2.0, 0.5);
  Eigen::VectorXd xi = vec2(1.2, 0.4);
  Cplx r = 1.0 / (xi.squaredNorm() - lambda);

  // q_{-3} vanishes: q_{-2} is x-independent and p_1 = 0.
  for (const auto& [f, m] : res->component_modes(1, xi, lambda))
    CHECK(m.cwiseAbs().maxCoeff() < 1e-14);

  // q_{-4} = -R V R carried on the potential modes.
  auto q2 = res->component_modes(2, xi, lambda);
  Freq f;
  f.k[0] = 1;
  CHECK(std::abs(q2.at(f)(0, 0) - (-r * r)) < 1e-13);
  CHECK(std::abs(q2.at(-f)(0, 0) - (-r * r)) < 1e-13);
}

TEST_CASE("composition identity (p - lambda) # q = 1 mod depth") {
  for (int which = 0; which < 2; ++which) {
    SymbolExpansion p = which == 0 ? schroedinger_symbol() : dirac2_twisted();
    ResolventPtr res = make_resolvent(p, cfg);
    const int r = p.fiber_dim;
    const int depth = 4;
    Cplx lambda(-1.3, 0.8);

    // Left factor: p with the constant -lambda folded into the top component.
    SymbolExpansion shifted = p;
    shifted.components[0].add_mode(Freq::zero(), Cplx(1, 0),
                                   make_const(-lambda * Matrix::Identity(r, r)));

    // Right factor: fixed-lambda resolvent components as expression nodes.
    SymbolExpansion q;
    q.order = -p.order;
    q.fiber_dim = r;
    q.torus_dim = p.torus_dim;
    q.exact_beyond = false;
    for (int j = 0; j <= depth; ++j) {
      HomogeneousComponent c;
      c.degree = -p.order - j;
      c.fiber_dim = r;
      c.torus_dim = p.torus_dim;
      for (const Freq& f : res->mode_support(j))
        c.modes[f] = make_resolvent_component(res, j, f, lambda);
      q.components.push_back(std::move(c));
    }

    SymbolExpansion prod = compose(shifted, q, depth, cfg);
    for (const auto& xi : sample_unit_covectors(2, 4, 5)) {
      for (int l = 0; l <= depth; ++l) {
        for (const auto& [f, e] : prod.components[l].modes) {
          Matrix v = prod.components[l].eval_mode(f, xi, cfg);
          if (l == 0 && f.is_zero()) v -= Matrix::Identity(r, r);
          CHECK(v.cwiseAbs().maxCoeff() < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("resolvent parity for odd-class input") {
  // q_{-m-j}(x, -xi, (-1)^m lambda) = (-1)^{m+j} q_{-m-j}(x, xi, lambda).
  for (int which = 0; which < 2; ++which) {
    SymbolExpansion p = which == 0 ? schroedinger_symbol() : dirac2_twisted();
    REQUIRE(odd_class_check(p, cfg).odd_class);
    ResolventPtr res = make_resolvent(p, cfg);
    int m = p.order;
    Cplx lambda(0.7, 1.3);
    Cplx lam_flip = (m % 2 == 0) ? lambda : -lambda;
    for (const auto& xi : sample_unit_covectors(2, 4, 7)) {
      for (int j = 0; j <= 3; ++j) {
        auto plusm = res->component_modes(j, xi, lambda);
        auto minusm = res->component_modes(j, -xi, lam_flip);
        double sign = ((m + j) % 2 == 0) ? 1.0 : -1.0;
        for (const auto& [f, v] : plusm) {
          Matrix w = minusm.count(f) ? minusm.at(f) : Matrix::Zero(v.rows(), v.cols());
          CHECK((w - sign * v).cwiseAbs().maxCoeff() < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("parameter homogeneity of resolvent components") {
  SymbolExpansion p = dirac2_twisted();
  ResolventPtr res = make_resolvent(p, cfg);
  int m = p.order;
  Cplx lambda(0.4, 0.9);
  Eigen::VectorXd xi = vec2(0.75, -0.5);
  double t = 2.0;
  double tm = std::pow(t, m);
  for (int j = 0; j <= 3; ++j) {
    auto base = res->component_modes(j, xi, lambda);
    auto scaled = res->component_modes(j, t * xi, tm * lambda);
    double factor = std::pow(t, -m - j);
    for (const auto& [f, v] : base) {
      Matrix w = scaled.count(f) ? scaled.at(f) : Matrix::Zero(v.rows(), v.cols());
      CHECK((w - factor * v).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, v.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("power expansions: explicit cases and the parametrix residual") {
  // p = |xi|^2, k = 1: single component |xi|^{-2}.
  SymbolExpansion inv_lap = power_expansion(laplace_symbol(2), 1, 3, cfg);
  CHECK(inv_lap.order == -2);
  for (const auto& xi : sample_unit_covectors(2, 3, 9)) {
    CHECK(std::abs(inv_lap.components[0].eval_mode(Freq::zero(), xi, cfg)(0, 0) -
                   std::pow(xi.squaredNorm(), -1.0)) < 1e-13);
    for (int j = 1; j <= 3; ++j)
      for (const auto& [f, e] : inv_lap.components[j].modes)
        CHECK(inv_lap.components[j].eval_mode(f, xi, cfg).cwiseAbs().maxCoeff() < 1e-13);
  }

  // p = sigma.xi, k = 2: |xi|^{-2} I.
  SymbolExpansion d2 = power_expansion(dirac2_symbol(), 2, 2, cfg);
  CHECK(d2.order == -2);
  for (const auto& xi : sample_unit_covectors(2, 3, 11)) {
    Matrix lead = d2.components[0].eval_mode(Freq::zero(), xi, cfg);
    Matrix expect = Matrix::Identity(2, 2) / xi.squaredNorm();
    CHECK((lead - expect).cwiseAbs().maxCoeff() < 1e-12);
  }

  // Composition residual p # p^{-1} = 1 mod depth for the twisted battery.
  for (int which = 0; which < 2; ++which) {
    SymbolExpansion p = which == 0 ? schroedinger_symbol() : dirac2_twisted();
    SymbolExpansion b = power_expansion(p, 1, 4, cfg);
    SymbolExpansion prod = compose(p, b, 4, cfg);
    const int r = p.fiber_dim;
    for (const auto& xi : sample_unit_covectors(2, 4, 13)) {
      for (int l = 0; l <= 4; ++l)
        for (const auto& [f, e] : prod.components[l].modes) {
          Matrix v = prod.components[l].eval_mode(f, xi, cfg);
          if (l == 0 && f.is_zero()) v -= Matrix::Identity(r, r);
          CHECK(v.cwiseAbs().maxCoeff() < 1e-9);
        }
    }
  }
}

TEST_CASE("odd-class closure of power expansions") {
  SymbolExpansion p = dirac2_twisted();
  REQUIRE(odd_class_check(p, cfg).odd_class);
  SymbolExpansion b2 = power_expansion(p, 2, 3, cfg);
  OddClassReport rep = odd_class_check(b2, cfg);
  CHECK(rep.odd_class);
  SymbolExpansion pm2 = power_expansion(p, -2, 3, cfg);
  CHECK(odd_class_check(pm2, cfg).odd_class);
}

TEST_CASE("ellipticity certificates and failures") {
  EllipticityReport rep = ellipticity_scan(dirac2_symbol(), cfg);
  CHECK(rep.elliptic);
  CHECK(rep.min_singular > 0.99);

  // sigma_3 xi_1: vanishes at xi = (0, 1), not elliptic.
  HomogeneousComponent c;
  c.degree = 1;
  c.fiber_dim = 2;
  c.torus_dim = 2;
  c.modes[Freq::zero()] = make_term(sigma(3), {1, 0, 0, 0}, 0);
  CHECK(!ellipticity_scan(single_component_expansion(c), cfg).elliptic);
  CHECK_THROWS_AS(power_expansion(single_component_expansion(c), 1, 2, cfg), Error);
}

TEST_CASE("projection expansions: smoothing and explicit principal symbols") {
  // Positive scalar symbol, sector strictly inside the upper half plane.
  SymbolExpansion lap = laplace_symbol(2);
  CutPair upper(kPi / 4, 3 * kPi / 4);
  CHECK(smoothing_check(lap, upper, cfg));
  SymbolExpansion pi_up = projection_expansion(lap, upper, 2, cfg);
  for (const auto& xi : sample_unit_covectors(2, 3, 15))
    for (int j = 0; j <= 2; ++j)
      for (const auto& [f, e] : pi_up.components[j].modes)
        CHECK(pi_up.components[j].eval_mode(f, xi, cfg).cwiseAbs().maxCoeff() < 1e-11);

  // Sector around the positive real axis catches everything.
  CutPair around_pos(7 * kPi / 4, 9 * kPi / 4);
  CHECK(!smoothing_check(lap, around_pos, cfg));
  SymbolExpansion pi_pos = projection_expansion(lap, around_pos, 2, cfg);
  for (const auto& xi : sample_unit_covectors(2, 3, 17)) {
    CHECK(std::abs(pi_pos.components[0].eval_mode(Freq::zero(), xi, cfg)(0, 0) - 1.0) < 1e-11);
    for (int j = 1; j <= 2; ++j)
      for (const auto& [f, e] : pi_pos.components[j].modes)
        CHECK(pi_pos.components[j].eval_mode(f, xi, cfg).cwiseAbs().maxCoeff() < 1e-11);
  }

  // Dirac: sector containing the negative spectral ray picks Pi_-.
  SymbolExpansion dir = dirac2_symbol();
  CutPair lower(kPi / 2, 3 * kPi / 2);
  SymbolExpansion pi_low = projection_expansion(dir, lower, 1, cfg);
  for (const auto& xi : sample_unit_covectors(2, 5, 19)) {
    Matrix got = pi_low.components[0].eval_mode(Freq::zero(), xi, cfg);
    Matrix sxi = sigma(1) * xi[0] + sigma(2) * xi[1];
    Matrix expect = 0.5 * (Matrix::Identity(2, 2) - sxi / xi.norm());
    CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Rotated eigenvalue pair stays clear of a half-plane sector.
  HomogeneousComponent rot;
  rot.degree = 1;
  rot.fiber_dim = 2;
  rot.torus_dim = 2;
  Matrix d(2, 2);
  d << std::polar(1.0, kPi / 4), 0, 0, std::polar(1.0, -kPi / 4);
  rot.modes[Freq::zero()] = make_term(d, {0, 0, 0, 0}, 1);
  CHECK(smoothing_check(single_component_expansion(rot), CutPair(kPi / 2, 3 * kPi / 2), cfg));
}

TEST_CASE("principal symbol law: pi_0 equals the fiberwise matrix projection") {
  SymbolExpansion p = dirac2_twisted();
  CutPair lower(kPi / 2, 3 * kPi / 2);
  ResolventPtr res = make_resolvent(p, cfg);
  SymbolExpansion pi = projection_expansion(res, lower, 1);
  for (const auto& xi : sample_unit_covectors(2, 6, 21)) {
    Matrix got = pi.components[0].eval_mode(Freq::zero(), xi, cfg);
    Matrix pm = p.components[0].eval_mode(Freq::zero(), xi, cfg);
    Matrix expect = sectorial_projection_matrix(pm, lower, cfg);
    CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("projection symbol idempotence and complementarity") {
  SymbolExpansion p = dirac2_twisted();
  ResolventPtr res = make_resolvent(p, cfg);
  CutPair lower(kPi / 2, 3 * kPi / 2);
  const int depth = 3;
  SymbolExpansion pi = projection_expansion(res, lower, depth);
  SymbolExpansion pi2 = compose(pi, pi, depth, cfg);
  for (const auto& xi : sample_unit_covectors(2, 4, 23)) {
    for (int j = 0; j <= depth; ++j) {
      std::set<Freq> freqs;
      for (const auto& [f, e] : pi.components[j].modes) freqs.insert(f);
      for (const auto& [f, e] : pi2.components[j].modes) freqs.insert(f);
      for (const Freq& f : freqs) {
        Matrix a = pi2.components[j].eval_mode(f, xi, cfg);
        Matrix b = pi.components[j].eval_mode(f, xi, cfg);
        if (a.size() == 0) a = Matrix::Zero(2, 2);
        if (b.size() == 0) b = Matrix::Zero(2, 2);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
      }
    }
  }

  // Complementary sector sums to the identity expansion.
  SymbolExpansion pi_c = projection_expansion(res, lower.complement(), depth);
  for (const auto& xi : sample_unit_covectors(2, 4, 25)) {
    for (int j = 0; j <= depth; ++j) {
      std::set<Freq> freqs;
      for (const auto& [f, e] : pi.components[j].modes) freqs.insert(f);
      for (const Freq& f : freqs) {
        Matrix sum = pi.components[j].eval_mode(f, xi, cfg) +
                     pi_c.components[j].eval_mode(f, xi, cfg);
        Matrix expect = (j == 0 && f.is_zero()) ? Matrix::Identity(2, 2).eval()
                                                : Matrix::Zero(2, 2).eval();
        CHECK((sum - expect).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
  }
}

TEST_CASE("split-sector parity of the projection symbol") {
  // Odd-class odd-order selfadjoint: spectrum in the split cone around R.
  SymbolExpansion p = dirac2_twisted();
  ResolventPtr res = make_resolvent(p, cfg);
  CutPair up(kPi / 2, 3 * kPi / 2);
  const int depth = 3;
  SymbolExpansion pi = projection_expansion(res, up, depth);
  for (const auto& xi : sample_unit_covectors(2, 4, 27)) {
    Matrix p0p = pi.components[0].eval_mode(Freq::zero(), xi, cfg);
    Matrix p0m = pi.components[0].eval_mode(Freq::zero(), -xi, cfg);
    CHECK((p0m - (Matrix::Identity(2, 2) - p0p)).cwiseAbs().maxCoeff() < 1e-8);
    for (int j = 1; j <= depth; ++j) {
      double sign = (j % 2 == 0) ? -1.0 : 1.0;  // (-1)^{j+1}
      for (const auto& [f, e] : pi.components[j].modes) {
        Matrix vp = pi.components[j].eval_mode(f, xi, cfg);
        Matrix vm = pi.components[j].eval_mode(f, -xi, cfg);
        CHECK((vm - sign * vp).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
  }
}
