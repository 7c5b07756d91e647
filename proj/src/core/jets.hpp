#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "core/matrix_kernel.hpp"

namespace spa {

// Multi-index over at most 4 variables; only the first nvars entries count.
using MIdx = std::array<int, 4>;

inline int midx_total(const MIdx& a) { return a[0] + a[1] + a[2] + a[3]; }

// Shared layout for truncated multivariate Taylor polynomials of a given
// variable count and total order.  Indices are graded (degree-major), so a
// lower-order plan over the same variables is a prefix of a higher-order one.
struct JetPlan {
  int nvars = 0;
  int order = 0;
  std::vector<MIdx> indices;
  // conv[k] lists the (ia, ib) pairs with indices[ia] + indices[ib] == indices[k].
  std::vector<std::vector<std::pair<int, int>>> conv;
  std::map<std::uint32_t, int> rank;  // packed multi-index -> position

  int size() const { return static_cast<int>(indices.size()); }
  int rank_of(const MIdx& m) const;  // -1 when outside the truncation

  static const JetPlan* get(int nvars, int order);
};

double midx_factorial(const MIdx& m);

// Taylor coefficients c_beta of f(x0 + t) = sum c_beta t^beta.
class ScalarJet {
 public:
  ScalarJet() = default;
  explicit ScalarJet(const JetPlan* p) : plan(p), c(p->size(), Cplx(0, 0)) {}

  static ScalarJet constant(const JetPlan* p, Cplx v);
  static ScalarJet variable(const JetPlan* p, Cplx v, int var);  // v + t_var

  Cplx value() const { return c[0]; }
  ScalarJet truncated(const JetPlan* p) const;

  const JetPlan* plan = nullptr;
  std::vector<Cplx> c;
};

ScalarJet operator+(const ScalarJet& a, const ScalarJet& b);
ScalarJet operator-(const ScalarJet& a, const ScalarJet& b);
ScalarJet operator*(const ScalarJet& a, const ScalarJet& b);
ScalarJet operator*(Cplx s, const ScalarJet& a);

// u^(p/2) for integer p; exact under scaling of u by powers of four, which is
// what makes positive-homogeneity hold to the bit for dyadic dilations.
ScalarJet pow_half_integer(const ScalarJet& u, int p);

class MatrixJet {
 public:
  MatrixJet() = default;
  MatrixJet(const JetPlan* p, int rows, int cols)
      : plan(p), c(p->size(), Matrix::Zero(rows, cols)) {}

  static MatrixJet constant(const JetPlan* p, const Matrix& m);

  int rows() const { return static_cast<int>(c[0].rows()); }
  int cols() const { return static_cast<int>(c[0].cols()); }
  const Matrix& value() const { return c[0]; }

  MatrixJet truncated(const JetPlan* p) const;
  // Jet of the alpha-th partial derivative, over the order-reduced plan.
  MatrixJet derivative(const MIdx& alpha) const;

  const JetPlan* plan = nullptr;
  std::vector<Matrix> c;
};

MatrixJet operator+(const MatrixJet& a, const MatrixJet& b);
MatrixJet operator-(const MatrixJet& a, const MatrixJet& b);
MatrixJet operator*(const MatrixJet& a, const MatrixJet& b);
MatrixJet operator*(const ScalarJet& s, const MatrixJet& a);
MatrixJet operator*(Cplx s, const MatrixJet& a);
void add_in_place(MatrixJet& a, const MatrixJet& b);
void add_scaled(MatrixJet& a, Cplx s, const MatrixJet& b);

// Truncated inverse; requires an invertible constant term (min singular value
// above sing_floor, else SingularFiber).
MatrixJet inverse(const MatrixJet& a, double sing_floor = 1e-12);

}  // namespace spa
