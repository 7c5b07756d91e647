#pragma once

#include <string>

#include "core/projection.hpp"
#include "core/quadrature.hpp"

namespace spa {

// Fiber-traced density on the uniform torus grid, synthesized from its
// x-Fourier modes (exact for the trigonometric data the engine produces).
struct DensityField {
  int torus_dim = 2;
  double volume = 0;
  std::vector<int> grid;         // points per axis, odd
  std::vector<Cplx> values;      // row-major over the grid
  std::map<Freq, Cplx> modes;    // Fourier modes of the density
  Cplx integral() const;         // exact torus integral
};

// Endomorphism-valued variant (used by the Dirac heat-route comparisons).
struct EndoDensityField {
  int torus_dim = 2;
  double volume = 0;
  std::vector<int> grid;
  std::vector<Matrix> values;
  std::map<Freq, Matrix> modes;
  Matrix integral() const;
  DensityField traced() const;
};

struct AsymmetryReport {
  std::string operator_id;
  double theta = 0;
  double theta_prime = 0;
  int k = 0;
  Cplx gap = 0;            // lim_{s->k} (zeta_theta - zeta_theta')
  Cplx residue_pk = 0;     // Res P^{-k}
  Cplx residue_pi_pk = 0;  // Res Pi_{theta,theta'}(P) P^{-k}
  bool fast_path = false;  // split-cone reduction applies
  Cplx fast_gap = 0;       // (i pi / ord P) Res P^{-k}
  double fast_discrepancy = 0;
  int depth = 0;
  double tol = 0;
};

// Cosphere quadrature grid sized for residue work.
CosphereGrid residue_grid(int n, const EngineConfig& cfg);

// Residue density c_Q(x) = (2pi)^{-n} int_{|xi|=1} tr q_{-n}; exactly zero
// when the degree -n component is absent from a finite expansion.
DensityField residue_density(const SymbolExpansion& q, double volume, const EngineConfig& cfg);
EndoDensityField residue_density_endo(const SymbolExpansion& q, double volume,
                                      const EngineConfig& cfg);

Cplx res_total(const SymbolExpansion& q, double volume, const EngineConfig& cfg);

// Zeta gap at integer k for one cut pair, via Res Pi P^{-k}; reports the
// split-cone value alongside when its hypotheses hold.
AsymmetryReport zeta_gap(const SymbolExpansion& p, const CutPair& cuts, int k, double volume,
                         const EngineConfig& cfg);

// Shared-resolvent batch over cut pairs and integer exponents; one cosphere
// sweep serves every report.
std::vector<AsymmetryReport> zeta_gap_batch(const SymbolExpansion& p,
                                            const std::vector<CutPair>& cuts,
                                            const std::vector<int>& ks, double volume,
                                            const EngineConfig& cfg);

struct LocalGapDensity {
  DensityField twice_r_density;  // 2 c_{R^{(k)}}(x)
  DensityField pk_density;       // c_{P^{-k}}(x)
  double max_violation = 0;      // max_x |2 c_R - c_Pk|
};

LocalGapDensity local_gap_density(const SymbolExpansion& p, const CutPair& cuts, int k,
                                  double volume, const EngineConfig& cfg);

struct EtaResidueReport {
  double value = 0;          // res_{s=k} eta(P;s)
  double imag_residual = 0;  // |imaginary part| before discarding
  Cplx residue_pk = 0;
  Cplx residue_pi_pk = 0;
};

// res_{s=k} eta = (Res P^{-k} - 2 Res Pi_- P^{-k}) / ord P for selfadjoint P.
EtaResidueReport eta_residue(const SymbolExpansion& p, int k, double volume,
                             const EngineConfig& cfg);

struct PositivityReport {
  double gap_over_i = 0;        // (1/i)(zeta_up - zeta_down)(n)
  double direct_integral = 0;   // pi (2pi)^{-n} int tr p_m^{-n}
  bool positive = false;
  double margin = 0;
};

PositivityReport positivity_check(const SymbolExpansion& p, double volume,
                                  const EngineConfig& cfg);

// Evaluates several homogeneous components over one cosphere grid in a single
// parallel sweep (shared per-fiber caches), returning per-mode integrals.
struct SweepTask {
  const HomogeneousComponent* comp = nullptr;
};
std::vector<std::map<Freq, Matrix>> cosphere_sweep(const std::vector<SweepTask>& tasks,
                                                   const CosphereGrid& grid,
                                                   const std::vector<int>& dirs,
                                                   const EngineConfig& cfg);

}  // namespace spa
