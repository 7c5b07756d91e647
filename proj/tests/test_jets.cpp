#include <doctest.h>

#include "core/jets.hpp"

using namespace spa;

TEST_CASE("scalar jet arithmetic reproduces Taylor coefficients") {
  const JetPlan* p = JetPlan::get(1, 3);
  ScalarJet x = ScalarJet::variable(p, 3.0, 0);
  ScalarJet sq = x * x;  // (3 + t)^2 = 9 + 6t + t^2
  CHECK(std::abs(sq.c[0] - 9.0) < 1e-15);
  CHECK(std::abs(sq.c[1] - 6.0) < 1e-15);
  CHECK(std::abs(sq.c[2] - 1.0) < 1e-15);
  CHECK(std::abs(sq.c[3]) < 1e-15);
}

TEST_CASE("half-integer powers through the norm jet") {
  // |xi| = sqrt(xi1^2 + xi2^2) at (3, 4): d/dxi1 |xi| = xi1/|xi| = 3/5.
  const JetPlan* p = JetPlan::get(2, 2);
  ScalarJet x = ScalarJet::variable(p, 3.0, 0);
  ScalarJet y = ScalarJet::variable(p, 4.0, 1);
  ScalarJet norm2 = x * x + y * y;
  ScalarJet norm = pow_half_integer(norm2, 1);
  CHECK(std::abs(norm.c[0] - 5.0) < 1e-14);
  int r10 = p->rank_of({1, 0, 0, 0});
  int r01 = p->rank_of({0, 1, 0, 0});
  CHECK(std::abs(norm.c[r10] - 0.6) < 1e-14);
  CHECK(std::abs(norm.c[r01] - 0.8) < 1e-14);

  ScalarJet inv = pow_half_integer(norm2, -2);  // |xi|^{-2}
  CHECK(std::abs(inv.c[0] - 1.0 / 25.0) < 1e-15);
  // d/dxi1 |xi|^{-2} = -2 xi1 / |xi|^4 = -6/625.
  CHECK(std::abs(inv.c[r10] + 6.0 / 625.0) < 1e-16);
}

TEST_CASE("matrix jet inverse matches the resolvent derivative identity") {
  const JetPlan* p = JetPlan::get(1, 2);
  Matrix a0(2, 2), b(2, 2);
  a0 << 2, Cplx(0, 1), 0, 3;
  b << 1, 0.5, -0.25, Cplx(0, -1);
  MatrixJet a(p, 2, 2);
  a.c[0] = a0;
  a.c[1] = b;
  MatrixJet inv = inverse(a);
  Matrix a0i = a0.inverse();
  CHECK((inv.c[0] - a0i).cwiseAbs().maxCoeff() < 1e-14);
  // d(A^{-1}) = -A^{-1} (dA) A^{-1}
  CHECK((inv.c[1] + a0i * b * a0i).cwiseAbs().maxCoeff() < 1e-14);
  // second order: A^{-1} B A^{-1} B A^{-1}
  CHECK((inv.c[2] - a0i * b * a0i * b * a0i).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("derivative extraction uses the factorial ladder") {
  const JetPlan* p = JetPlan::get(2, 4);
  ScalarJet x = ScalarJet::variable(p, 1.0, 0);
  ScalarJet y = ScalarJet::variable(p, 2.0, 1);
  // f = x^2 y: d^2/dx dy f = 2x = 2 at the base point.
  ScalarJet f = x * x * y;
  MatrixJet fm(p, 1, 1);
  for (size_t i = 0; i < f.c.size(); ++i) fm.c[i] = Matrix::Constant(1, 1, f.c[i]);
  MatrixJet d = fm.derivative({1, 1, 0, 0});
  CHECK(std::abs(d.c[0](0, 0) - 2.0) < 1e-14);
}

TEST_CASE("mixed second derivative of xi1 xi2 / |xi|^2 at (1,0)") {
  // Hand oracle: expansion of d_1 d_2 (xi1 xi2 / |xi|^2) at (1, 0) gives -1.
  const JetPlan* p = JetPlan::get(2, 2);
  ScalarJet x = ScalarJet::variable(p, 1.0, 0);
  ScalarJet y = ScalarJet::variable(p, 0.0, 1);
  ScalarJet f = x * y * pow_half_integer(x * x + y * y, -2);
  int r11 = p->rank_of({1, 1, 0, 0});
  // Taylor coefficient c_{(1,1)} equals the mixed derivative (1!1! = 1).
  CHECK(std::abs(f.c[r11] - Cplx(-1.0, 0)) < 1e-13);
}

TEST_CASE("plans of the same variable count share prefix ranks") {
  const JetPlan* lo = JetPlan::get(3, 2);
  const JetPlan* hi = JetPlan::get(3, 5);
  for (int i = 0; i < lo->size(); ++i) CHECK(lo->indices[i] == hi->indices[i]);
}
