#include "core/quadrature.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace spa {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

Quad1d gauss_legendre(int n) {
  Quad1d q;
  q.nodes.resize(n);
  q.weights.resize(n);
  // Nodes come in +/- pairs; iterate the upper half and mirror.
  int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double p0 = 0, p1 = 0;
    for (int iter = 0; iter < 100; ++iter) {
      p0 = 1.0;
      p1 = 0.0;
      for (int k = 0; k < n; ++k) {  // ascending Legendre recurrence
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
      }
      double dp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = 0.0;
    for (int k = 0; k < n; ++k) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
    }
    double dp = n * (x * p0 - p1) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = -x;
    q.weights[i] = w;
    q.nodes[n - 1 - i] = x;
    q.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;  // exact symmetry for the middle node
  return q;
}

Quad1d gauss_chebyshev2(int n) {
  Quad1d q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = kPi * (i + 1.0) / (n + 1.0);
    double s = std::sin(t);
    q.nodes[i] = std::cos(t);
    q.weights[i] = kPi / (n + 1.0) * s * s;
  }
  return q;
}

Quad1d uniform_angle(int n) {
  Quad1d q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    q.nodes[i] = 2.0 * kPi * i / n;
    q.weights[i] = 2.0 * kPi / n;
  }
  return q;
}

CosphereGrid cosphere_grid(int n, int res_a, int res_b, int res_c) {
  CosphereGrid g;
  g.dim = n;
  if (n == 2) {
    // Uniform angles; even count keeps the grid antipodally symmetric.
    int m = res_a + (res_a % 2);
    Quad1d ang = uniform_angle(m);
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd p(2);
      p << std::cos(ang.nodes[i]), std::sin(ang.nodes[i]);
      g.points.push_back(p);
      g.weights.push_back(ang.weights[i]);
    }
  } else if (n == 3) {
    // Product rule: Gauss-Legendre in cos(theta), uniform in phi.
    int mphi = res_b > 0 ? res_b : 2 * res_a;
    mphi += mphi % 2;
    Quad1d gl = gauss_legendre(res_a);
    Quad1d ang = uniform_angle(mphi);
    for (int i = 0; i < res_a; ++i) {
      double u = gl.nodes[i];
      double s = std::sqrt(std::max(0.0, 1.0 - u * u));
      for (int j = 0; j < mphi; ++j) {
        Eigen::VectorXd p(3);
        p << s * std::cos(ang.nodes[j]), s * std::sin(ang.nodes[j]), u;
        g.points.push_back(p);
        g.weights.push_back(gl.weights[i] * ang.weights[j]);
      }
    }
  } else if (n == 4) {
    // omega = (u, sqrt(1-u^2) v, sqrt(1-u^2) sqrt(1-v^2) cos phi, ... sin phi)
    // with measure sqrt(1-u^2) du dv dphi; Chebyshev-II absorbs the weight,
    // so constants integrate to exactly 2 pi^2.
    int mtheta = res_b > 0 ? res_b : res_a;
    int mphi = res_c > 0 ? res_c : 2 * res_a;
    mphi += mphi % 2;
    Quad1d c2 = gauss_chebyshev2(res_a);
    Quad1d gl = gauss_legendre(mtheta);
    Quad1d ang = uniform_angle(mphi);
    for (int i = 0; i < res_a; ++i) {
      double u = c2.nodes[i];
      double su = std::sqrt(std::max(0.0, 1.0 - u * u));
      for (int j = 0; j < mtheta; ++j) {
        double v = gl.nodes[j];
        double sv = std::sqrt(std::max(0.0, 1.0 - v * v));
        for (int k = 0; k < mphi; ++k) {
          Eigen::VectorXd p(4);
          p << u, su * v, su * sv * std::cos(ang.nodes[k]), su * sv * std::sin(ang.nodes[k]);
          g.points.push_back(p);
          g.weights.push_back(c2.weights[i] * gl.weights[j] * ang.weights[k]);
        }
      }
    }
  } else {
    fail(ErrorCode::UnsupportedDimension, "cosphere grids exist for n in {2,3,4}");
  }
  return g;
}

}  // namespace spa
