#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "core/config.hpp"

namespace spa {

using Cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// Pair of spectral-cut angles.  theta lies in [0, 2pi); theta_prime in
// (theta, theta + 2pi].  The open sector is theta < arg < theta_prime mod 2pi.
struct CutPair {
  double theta;
  double theta_prime;

  CutPair(double t, double tp);

  bool sector_contains(Cplx z) const;
  // Distance from z to the nearer of the two cut rays (as half-lines from 0).
  double ray_distance(Cplx z) const;
  // The complementary sector (theta_prime, theta + 2pi).
  CutPair complement() const;
};

// One closed quadrature loop in the lambda plane.  Weights carry the
// d-lambda parametrization factor, so integral f = sum_t weights[t]*f(nodes[t]).
struct ContourSpec {
  std::vector<Cplx> nodes;
  std::vector<Cplx> weights;
  double clearance = 0.0;       // certified min distance to any relevant pole
  bool direct_oriented = true;  // counterclockwise

  // Direct-oriented circle, trapezoid nodes (spectrally accurate).
  static ContourSpec circle(Cplx center, double radius, int n);
  // Boundary of the annular sector {r<|z|<R, theta<arg z<theta_prime} in the
  // ray-in / inner-arc / ray-out / outer-arc-back order, i.e. negatively
  // oriented.  Open pieces get Gauss-Legendre panels (trapezoid is only
  // spectral on closed smooth loops).
  static ContourSpec sector_stadium(const CutPair& cuts, double r, double R, int total_nodes);

  int winding_number(Cplx z) const;
  double min_distance(Cplx z) const;
};

// One spectral cluster of a matrix, with its algebraic (Riesz) projector.
struct EigenCluster {
  Cplx center;                    // mean of members
  std::vector<Cplx> eigenvalues;  // with algebraic repetition
  double radius = 0.0;            // max |lambda - center|
  int multiplicity = 0;
  Matrix projector;
};

std::vector<Cplx> eigenvalues_of(const Matrix& a);

// Schur-form clustering + Sylvester block splitting.  Projectors are exact
// algebraic objects (no contours), so this is the independent oracle for the
// quadrature paths.  Throws ClusterAmbiguity when two clusters approach
// within 2x the tolerance of each other.
std::vector<EigenCluster> eigen_oracle(const Matrix& a, double cluster_tol = 1e-8);

// (-1/2 i pi) * contour integral of (A - mu)^(-1), direct-oriented gamma.
Matrix riesz_projection(const Matrix& a, const ContourSpec& gamma);

// (1/2 i pi) * integral of lambda^(-1) A (A-lambda)^(-1) over a paper-oriented
// sector contour (e.g. sector_stadium).
Matrix sectorial_projection_via(const Matrix& a, const ContourSpec& gamma);

// Sectorial projection onto root spaces of eigenvalues with argument in the
// open sector; quadrature over per-cluster direct-oriented circles.
Matrix sectorial_projection_matrix(const Matrix& a, const CutPair& cuts,
                                   const EngineConfig& cfg = {});

// Branch arg in (theta - 2pi, theta); throws BranchViolation on the ray.
double arg_on_branch(Cplx z, double theta);
Cplx power_on_branch(Cplx z, Cplx s, double theta);

// A^s with the spectral cut L_theta; eigenvalue 0 (within cluster_tol) is
// projected out, matching the partial-inverse convention for integer powers.
Matrix matrix_complex_power(const Matrix& a, Cplx s, double theta,
                            const EngineConfig& cfg = {});

}  // namespace spa
