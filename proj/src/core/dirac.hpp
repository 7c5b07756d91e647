#pragma once

#include "core/residue.hpp"

namespace spa {

// Clifford module data on a flat even-dimensional torus: gamma matrices,
// grading, and a twisted unitary connection given by Hermitian trigonometric
// matrix fields A_i(x).
struct CliffordData {
  int n = 2;           // torus dimension, even (2 or 4)
  int twist_rank = 1;
  double volume = 0;   // torus volume
  std::vector<Matrix> gamma;  // n Hermitian anticommuting generators
  Matrix chirality;           // grading, anticommutes with every gamma
  std::vector<std::map<Freq, Matrix>> connection;  // A_i Fourier data (twist side)

  int spinor_dim() const { return 1 << (n / 2); }
  int fiber_dim() const { return spinor_dim() * twist_rank; }
};

// Standard tensor-product generators; UnsupportedDimension outside {2, 4}.
CliffordData clifford_generators(int n);

// Full Clifford data with a twist; validates Hermitian coefficient pairing
// A_i[-k] = A_i[k]^* and dimensions.
CliffordData make_clifford(int n, int twist_rank, double volume,
                           std::vector<std::map<Freq, Matrix>> connection);

// Twisted curvature F_ij = d_i A_j - d_j A_i + i [A_i, A_j] as Fourier data.
struct TwistCurvature {
  std::map<std::pair<int, int>, std::map<Freq, Matrix>> entries;  // i < j
};
TwistCurvature twist_curvature(const CliffordData& data);

// Symbol of the Dirac operator: p_1 = sum gamma^i xi_i (x) id,
// p_0 = sum gamma^i (x) A_i(x).
SymbolExpansion dirac_symbol(const CliffordData& data);

// c(F) = -i sum_{i<j} gamma^i gamma^j (x) F_ij, the order-0 endomorphism with
// D^2 = (connection Laplacian) + c(F) on flat tori (r_M = 0); this convention
// is pinned by requiring the identity to hold exactly.
HomogeneousComponent clifford_curvature_term(const CliffordData& data);

struct LichnerowiczReport {
  SymbolExpansion square;            // compose(D, D)
  SymbolExpansion laplacian_plus_cf; // connection Laplacian + c(F)
  double max_residual = 0;           // componentwise over sampled fibers
};
LichnerowiczReport lichnerowicz_square(const CliffordData& data, const EngineConfig& cfg);

struct HeatCoefficients {
  EndoDensityField a0;  // (4 pi)^{-n/2} id
  EndoDensityField a1;  // -(4 pi)^{-n/2} (r_M/12 id + c(F)), flat: r_M = 0
};
HeatCoefficients heat_coefficients(const CliffordData& data, const EngineConfig& cfg);

struct DiracAsymmetryReport {
  int k = 0;
  Cplx residue_route = 0;  // i pi Res D^{-k}
  bool heat_route_available = false;
  Cplx heat_route = 0;     // i pi int tr [2/(l-1)! a_{n/2-l}]
  double discrepancy = 0;
  std::string mechanism;   // named vanishing mechanism when the gap is 0 a priori
};

// Spectral-asymmetry gap of the Dirac operator at integer k; for even k in
// [2, n] both the residue route and (when a_0/a_1 suffice) the heat route.
DiracAsymmetryReport dirac_asymmetry(const CliffordData& data, int k, const EngineConfig& cfg);

// (2 pi)^{-n} vol(S^{n-1}) computed by the engine quadrature vs the closed
// form 2 (4 pi)^{-n/2} / Gamma(n/2) (Gamma(1) = Gamma(2) = 1).
struct SphereConstantCheck {
  double quadrature = 0;
  double closed_form = 0;
};
SphereConstantCheck sphere_constant_check(int n, const EngineConfig& cfg);

}  // namespace spa
