#pragma once

#include <Eigen/Dense>
#include <vector>

namespace spa {

struct Quad1d {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre on [-1, 1] (Newton on the Legendre recurrence).
Quad1d gauss_legendre(int n);

// Gauss-Chebyshev of the second kind: integrates f(u) sqrt(1-u^2) du on [-1,1]
// with the weight folded into the quadrature weights.
Quad1d gauss_chebyshev2(int n);

// Uniform periodic (trapezoid) rule on [0, 2pi).
Quad1d uniform_angle(int n);

// Quadrature points on the unit cosphere S^{n-1}, n in {2,3,4}.  Grids are
// antipodally symmetric and integrate constants exactly (sum of weights equals
// vol S^{n-1} = 2pi, 4pi, 2pi^2 up to rounding).
struct CosphereGrid {
  int dim = 0;                         // ambient n
  std::vector<Eigen::VectorXd> points; // unit vectors
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

CosphereGrid cosphere_grid(int n, int res_a, int res_b = 0, int res_c = 0);

}  // namespace spa
