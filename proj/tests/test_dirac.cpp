#include <doctest.h>

#include "core/dirac.hpp"
#include "core/errors.hpp"

using namespace spa;

namespace {

const EngineConfig cfg{};
constexpr double kPi = 3.141592653589793238462643383279502884;

double vol_torus(int n) {
  double v = 1;
  for (int i = 0; i < n; ++i) v *= 2 * kPi;
  return v;
}

// Rank-1 twist on T^n: A_1 = cos x2, A_2 = sin x1 (Hermitian scalars).
std::vector<std::map<Freq, Matrix>> abelian_twist(int n) {
  std::vector<std::map<Freq, Matrix>> conn(n);
  Matrix half = Matrix::Constant(1, 1, 0.5);
  Freq e2;
  e2.k[1] = 1;
  conn[0][e2] = half;
  conn[0][-e2] = half;
  Freq e1;
  e1.k[0] = 1;
  conn[1][e1] = Matrix::Constant(1, 1, Cplx(0, -0.5));
  conn[1][-e1] = Matrix::Constant(1, 1, Cplx(0, 0.5));
  return conn;
}

}  // namespace

TEST_CASE("Clifford generators satisfy the relations exactly") {
  for (int n : {2, 4}) {
    CliffordData d = clifford_generators(n);
    int s = d.spinor_dim();
    for (int i = 0; i < n; ++i) {
      CHECK((d.gamma[i] - d.gamma[i].adjoint()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(std::abs(d.gamma[i].trace()) == 0.0);
      for (int j = 0; j < n; ++j) {
        Matrix anti = d.gamma[i] * d.gamma[j] + d.gamma[j] * d.gamma[i];
        Matrix expect = (i == j) ? (2.0 * Matrix::Identity(s, s)).eval()
                                 : Matrix::Zero(s, s).eval();
        CHECK((anti - expect).cwiseAbs().maxCoeff() == 0.0);
      }
      Matrix chi_anti = d.chirality * d.gamma[i] + d.gamma[i] * d.chirality;
      CHECK(chi_anti.cwiseAbs().maxCoeff() == 0.0);
      for (int j = 0; j < n; ++j)
        if (i != j) CHECK(std::abs((d.gamma[i] * d.gamma[j]).trace()) == 0.0);
    }
    CHECK((d.chirality * d.chirality - Matrix::Identity(s, s)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(clifford_generators(3), Error);
}

TEST_CASE("Dirac symbol: order, parity, spectrum of the principal part") {
  CliffordData d = make_clifford(2, 1, vol_torus(2), abelian_twist(2));
  SymbolExpansion s = dirac_symbol(d);
  CHECK(s.order == 1);
  CHECK(odd_class_check(s, cfg).odd_class);

  Eigen::VectorXd xi(2);
  xi << 3, 4;
  Matrix p1 = s.components[0].eval_mode(Freq::zero(), xi, cfg);
  std::vector<Cplx> eigs = eigenvalues_of(p1);
  int plus = 0, minus = 0;
  for (const Cplx& ev : eigs) {
    CHECK(std::abs(std::abs(ev) - 5.0) < 1e-12);
    (ev.real() > 0 ? plus : minus)++;
  }
  CHECK(plus == 1);
  CHECK(minus == 1);
}

TEST_CASE("Lichnerowicz identity on the flat twisted torus") {
  // Untwisted: D^2 = |xi|^2 Id exactly.
  CliffordData plain = clifford_generators(2);
  LichnerowiczReport rep0 = lichnerowicz_square(plain, cfg);
  CHECK(rep0.max_residual < 1e-13);

  // Single-field twist from the worked curvature example: A_1 = cos x2.
  std::vector<std::map<Freq, Matrix>> conn(2);
  Matrix half = Matrix::Constant(1, 1, 0.5);
  Freq e2;
  e2.k[1] = 1;
  conn[0][e2] = half;
  conn[0][-e2] = half;
  CliffordData one = make_clifford(2, 1, vol_torus(2), conn);
  TwistCurvature f = twist_curvature(one);
  // F_12 = d_1 A_2 - d_2 A_1 = sin x2: modes +- e2 with coefficients -+ i/2.
  REQUIRE(f.entries.count({0, 1}) == 1);
  CHECK(std::abs(f.entries.at({0, 1}).at(e2)(0, 0) - Cplx(0, -0.5)) < 1e-14);
  CHECK(std::abs(f.entries.at({0, 1}).at(-e2)(0, 0) - Cplx(0, 0.5)) < 1e-14);
  CHECK(lichnerowicz_square(one, cfg).max_residual < 1e-13);

  // Two-field abelian twist on T^2 and T^4.
  CliffordData t2 = make_clifford(2, 1, vol_torus(2), abelian_twist(2));
  CHECK(lichnerowicz_square(t2, cfg).max_residual < 1e-13);
  CliffordData t4 = make_clifford(4, 1, vol_torus(4), abelian_twist(4));
  CHECK(lichnerowicz_square(t4, cfg).max_residual < 1e-13);

  // Commuting constant connection: zero curvature.
  std::vector<std::map<Freq, Matrix>> cc(2);
  cc[0][Freq::zero()] = Matrix::Constant(1, 1, 0.7);
  cc[1][Freq::zero()] = Matrix::Constant(1, 1, -0.2);
  CliffordData shifted = make_clifford(2, 1, vol_torus(2), cc);
  CHECK(twist_curvature(shifted).entries.empty());
  CHECK(lichnerowicz_square(shifted, cfg).max_residual < 1e-13);
}

TEST_CASE("heat coefficients on flat tori") {
  CliffordData plain = clifford_generators(2);
  HeatCoefficients h = heat_coefficients(plain, cfg);
  CHECK(std::abs(h.a0.traced().values[0] - 2.0 / (4 * kPi)) < 1e-14);

  CliffordData t4 = make_clifford(4, 2, vol_torus(4),
                                  [] {
                                    auto c = abelian_twist(4);
                                    for (auto& field : c)
                                      for (auto& [k, m] : field)
                                        m = Matrix::Identity(2, 2) * m(0, 0);
                                    return c;
                                  }());
  HeatCoefficients h4 = heat_coefficients(t4, cfg);
  CHECK(std::abs(h4.a0.traced().values[0] - 8.0 / std::pow(4 * kPi, 2)) < 1e-14);
  // Traced a1 vanishes identically on flat tori.
  for (const Cplx& v : h4.a1.traced().values) CHECK(std::abs(v) < 1e-13);
}

TEST_CASE("Dirac asymmetry at k = n on T^2 and T^4") {
  CliffordData t2 = make_clifford(2, 1, vol_torus(2), abelian_twist(2));
  DiracAsymmetryReport r2 = dirac_asymmetry(t2, 2, cfg);
  Cplx expect2 = Cplx(0, 2 * kPi) * std::pow(4 * kPi, -1.0) * 2.0 * vol_torus(2);
  CHECK(std::abs(r2.residue_route - expect2) < 1e-6 * std::abs(expect2));
  CHECK(r2.heat_route_available);
  CHECK(r2.discrepancy < 1e-6 * std::abs(expect2));

  CliffordData t4 = make_clifford(4, 1, vol_torus(4), abelian_twist(4));
  DiracAsymmetryReport r4 = dirac_asymmetry(t4, 4, cfg);
  Cplx expect4 = Cplx(0, 2 * kPi) * std::pow(4 * kPi, -2.0) * 4.0 * vol_torus(4);
  CHECK(std::abs(r4.residue_route - expect4) < 1e-6 * std::abs(expect4));
  CHECK(r4.heat_route_available);
  CHECK(r4.discrepancy < 1e-6 * std::abs(expect4));
}

TEST_CASE("Dirac asymmetry at k = n - 2 vanishes on flat twisted tori") {
  CliffordData t4 = make_clifford(4, 1, vol_torus(4), abelian_twist(4));
  DiracAsymmetryReport r = dirac_asymmetry(t4, 2, cfg);
  CHECK(std::abs(r.residue_route) < 1e-6);
  CHECK(r.heat_route_available);
  CHECK(std::abs(r.heat_route) < 1e-12);
  CHECK(r.discrepancy < 1e-6);
}

TEST_CASE("heat-kernel route for the residue density of the squared operator") {
  // c_{(D^2)^{-1}}(x) = 2 a_{n/2-1}(x) as endomorphism densities.
  // n = 2 untwisted: both sides are (2 pi)^{-1} Id.
  CliffordData plain = clifford_generators(2);
  SymbolExpansion d2 = lichnerowicz_square(plain, cfg).square;
  SymbolExpansion inv = power_expansion(d2, 1, 0, cfg);
  EndoDensityField c = residue_density_endo(inv, vol_torus(2), cfg);
  Matrix expect = Matrix::Identity(2, 2) / (2 * kPi);
  CHECK((c.values[0] - expect).cwiseAbs().maxCoeff() < 1e-12);

  // n = 4 twisted: compare against 2 a_1 pointwise on the common grid.
  CliffordData t4 = make_clifford(4, 1, vol_torus(4), abelian_twist(4));
  SymbolExpansion sq4 = lichnerowicz_square(t4, cfg).square;
  SymbolExpansion inv4 = power_expansion(sq4, 1, 2, cfg);
  EndoDensityField c4 = residue_density_endo(inv4, vol_torus(4), cfg);
  HeatCoefficients h4 = heat_coefficients(t4, cfg);
  std::set<Freq> freqs;
  for (const auto& [f, m] : c4.modes) freqs.insert(f);
  for (const auto& [f, m] : h4.a1.modes) freqs.insert(f);
  int fib = t4.fiber_dim();
  for (const Freq& f : freqs) {
    Matrix lhs = c4.modes.count(f) ? c4.modes.at(f) : Matrix::Zero(fib, fib);
    Matrix rhs = h4.a1.modes.count(f) ? (2.0 * h4.a1.modes.at(f)).eval() : Matrix::Zero(fib, fib);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("chirality kills traced densities of odd powers") {
  CliffordData t2 = make_clifford(2, 1, vol_torus(2), abelian_twist(2));
  SymbolExpansion d = dirac_symbol(t2);
  SymbolExpansion inv = power_expansion(d, 1, 1, cfg);  // D^{-1}, density at depth 1
  DensityField c = residue_density(inv, vol_torus(2), cfg);
  for (const Cplx& v : c.values) CHECK(std::abs(v) < 1e-9);

  DiracAsymmetryReport odd = dirac_asymmetry(t2, 1, cfg);
  CHECK(odd.residue_route == Cplx(0, 0));
  CHECK(!odd.mechanism.empty());
  DiracAsymmetryReport outside = dirac_asymmetry(t2, 6, cfg);
  CHECK(outside.residue_route == Cplx(0, 0));
}

TEST_CASE("cosphere volume ties to the heat normalization constant") {
  for (int n : {2, 4}) {
    SphereConstantCheck c = sphere_constant_check(n, cfg);
    CHECK(std::abs(c.quadrature - c.closed_form) < 1e-12);
  }
}
