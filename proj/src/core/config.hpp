#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

namespace spa {

inline constexpr const char* kEngineVersion = "specasym 0.1.0";

// Numerical knobs shared across the engine.  Defaults are the shipped
// configuration; every report echoes the values that were in effect.
struct EngineConfig {
  // Eigenvalues closer than this are treated as one spectral cluster.
  double cluster_tolerance = 1e-8;
  // Target accuracy for contour-quadrature projections and powers.
  double contour_tol = 1e-9;
  // Parity / homogeneity check tolerances.
  double parity_tol = 1e-10;
  double deriv_tol = 1e-10;
  // Ellipticity certificate: min singular value of the principal symbol
  // over the unit cosphere must stay above this.
  double ellipticity_floor = 1e-6;
  // Relative floor for positivity assertions.
  double positivity_floor = 1e-6;
  // Matrix-inverse nodes require this much smallest singular value.
  double singular_floor = 1e-12;

  // Matrix-level contours (dims <= 8, cheap): fixed node count.
  int matrix_contour_nodes = 1024;
  // Per-fiber symbol contours: node count is certified from the pole
  // geometry; these bound it.  A nonzero override forces the count.
  int symbol_contour_min_nodes = 48;
  int symbol_contour_max_nodes = 2048;
  int symbol_contour_override = 0;

  // Default truncation depth for symbol expansions.
  int default_depth = 4;
  // Hard cap on the total xi-derivative order the jet engine will carry.
  int max_deriv_order = 12;

  // Cosphere quadrature resolution (per-axis node counts).
  int circle_nodes = 192;        // n = 2
  int sphere_polar_nodes = 20;   // n = 3: Gauss-Legendre in cos(theta)
  int sphere_azimuth_nodes = 40; // n = 3: uniform in phi
  int s3_chi_nodes = 16;         // n = 4: Gauss-Chebyshev II in cos(chi)
  int s3_theta_nodes = 16;       // n = 4: Gauss-Legendre in cos(theta)
  int s3_phi_nodes = 32;         // n = 4: uniform in phi

  // Eigenvalue scan resolution per cosphere axis (>= 64 per spec'd scans).
  int scan_nodes_per_axis = 64;

  // Threads for fiber-parallel loops; 0 = use SPECASYM_THREADS or 1.
  int threads = 0;

  int effective_threads() const {
    if (threads > 0) return threads;
    if (const char* env = std::getenv("SPECASYM_THREADS")) {
      int t = std::atoi(env);
      if (t >= 1) return t;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(hw == 0 ? 1 : std::min(hw, 4u));
  }
};

}  // namespace spa
