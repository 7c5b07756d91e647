#include "core/verify.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace spa {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

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

double torus_volume(int n) {
  double v = 1;
  for (int i = 0; i < n; ++i) v *= 2 * kPi;
  return v;
}

Matrix random_matrix(Rng& rng, int r, double scale) {
  Matrix m(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) m(i, j) = rng.complex_in_box(scale);
  return m;
}

Matrix with_spectrum(Rng& rng, const std::vector<Cplx>& eigs) {
  int n = static_cast<int>(eigs.size());
  Matrix v = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v(i, j) += 0.3 * rng.complex_in_box(1.0);
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = eigs[i];
  return v * d * v.inverse();
}

double mnorm(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

struct Suite {
  VerifyReport report;
  const EngineConfig* cfg;

  void add(const std::string& module, const std::string& name, double measured, double tol,
           int criterion = 0) {
    report.results.push_back({module, name, measured, tol, measured <= tol, criterion});
  }
  void add_flag(const std::string& module, const std::string& name, bool ok, int criterion = 0) {
    report.results.push_back({module, name, ok ? 0.0 : 1.0, 0.5, ok, criterion});
  }
};

// ---------------------------------------------------------------------------
// matrix-spectral-kernel suite

void matrix_suite(Suite& s, Rng& rng, bool full) {
  const EngineConfig& cfg = *s.cfg;
  int trials = full ? 100 : 20;

  double worst_oracle = 0, worst_idem = 0;
  for (int t = 0; t < trials; ++t) {
    int dim = 2 + static_cast<int>(rng.next_u64() % 7);  // 2..8
    CutPair cuts(rng.uniform(0.05, 1.2), rng.uniform(2.2, 5.0));
    std::vector<Cplx> eigs;
    int guard = 0;
    while (static_cast<int>(eigs.size()) < dim && guard++ < 4000) {
      Cplx ev = rng.complex_in_box(2.0);
      if (std::abs(ev) < 0.35) continue;
      if (cuts.ray_distance(ev) < 0.12) continue;  // clearance >= 0.1
      bool far = true;
      for (const Cplx& e : eigs)
        if (std::abs(e - ev) < 0.3) far = false;
      if (far) eigs.push_back(ev);
    }
    if (static_cast<int>(eigs.size()) < dim) continue;
    Matrix a = with_spectrum(rng, eigs);

    Matrix pi = sectorial_projection_matrix(a, cuts, cfg);
    worst_idem = std::max(worst_idem, mnorm(pi * pi - pi));
    Matrix expect = Matrix::Zero(dim, dim);
    for (const auto& c : eigen_oracle(a, cfg.cluster_tolerance))
      if (cuts.sector_contains(c.center)) expect += c.projector;
    worst_oracle = std::max(worst_oracle, mnorm(pi - expect));
  }
  s.add("matrix-kernel", "sectorial projection matches the eigen oracle", worst_oracle, 1e-10, 1);
  s.add("matrix-kernel", "contour projections are idempotent", worst_idem, 1e-10);

  // Disjointness, complement decomposition, and the cut-difference identity.
  double worst_disjoint = 0, worst_decomp = 0, worst_prop41 = 0;
  for (int t = 0; t < (full ? 8 : 3); ++t) {
    std::vector<Cplx> eigs;
    int guard = 0;
    while (static_cast<int>(eigs.size()) < 4 && guard++ < 4000) {
      Cplx ev = rng.complex_in_box(1.8);
      if (std::abs(ev) < 0.4) continue;
      if (std::abs(ev.real()) < 0.25 || std::abs(ev.imag()) < 0.25) continue;  // clear of axes
      bool far = true;
      for (const Cplx& e : eigs)
        if (std::abs(e - ev) < 0.35) far = false;
      if (far) eigs.push_back(ev);
    }
    if (static_cast<int>(eigs.size()) < 4) continue;
    Matrix a = with_spectrum(rng, eigs);

    CutPair right(3 * kPi / 2, 2 * kPi + kPi / 2);  // right half plane
    CutPair left(kPi / 2, 3 * kPi / 2);
    Matrix p1 = sectorial_projection_matrix(a, right, cfg);
    Matrix p2 = sectorial_projection_matrix(a, left, cfg);
    worst_disjoint = std::max(worst_disjoint, std::max(mnorm(p1 * p2), mnorm(p2 * p1)));
    worst_decomp = std::max(worst_decomp, mnorm(p1 + p2 - Matrix::Identity(4, 4)));

    CutPair cuts(kPi / 2, 3 * kPi / 2);
    Matrix pi = sectorial_projection_matrix(a, cuts, cfg);
    int s_count = full ? 20 : 6;
    for (int i = 0; i < s_count; ++i) {
      Cplx sv(rng.uniform(-2.0, -0.05), rng.uniform(-1.5, 1.5));
      Matrix up = matrix_complex_power(a, sv, cuts.theta, cfg);
      Matrix dn = matrix_complex_power(a, sv, cuts.theta_prime, cfg);
      Cplx factor = 1.0 - std::exp(Cplx(0, 2 * kPi) * sv);
      worst_prop41 = std::max(worst_prop41, mnorm(up - dn - factor * (pi * up)));
    }
  }
  s.add("matrix-kernel", "disjoint sectors give disjoint projections", worst_disjoint, 1e-10, 2);
  s.add("matrix-kernel", "complementary sectors sum to 1 - Pi_0", worst_decomp, 1e-10, 2);
  s.add("matrix-kernel", "cut difference identity for complex powers", worst_prop41, 1e-9, 2);

  // Selfadjoint decomposition of complex powers (up cut).
  double worst_sa = 0;
  for (int t = 0; t < (full ? 6 : 2); ++t) {
    int dim = 3 + static_cast<int>(rng.next_u64() % 3);
    Matrix h = random_matrix(rng, dim, 1.0);
    Matrix a = 0.5 * (h + h.adjoint());
    std::vector<Cplx> eigs = eigenvalues_of(a);
    bool ok = true;
    for (const Cplx& ev : eigs)
      if (std::abs(ev.real()) < 0.2) ok = false;
    if (!ok) continue;
    CutPair updown(kPi / 2, 3 * kPi / 2);
    Matrix plus = Matrix::Zero(dim, dim), minus = Matrix::Zero(dim, dim);
    Matrix absa = Matrix::Zero(dim, dim);
    Cplx sv(rng.uniform(-1.5, -0.1), 0.0);
    for (const auto& c : eigen_oracle(a, cfg.cluster_tolerance)) {
      (c.center.real() > 0 ? plus : minus) += c.projector;
      absa += std::pow(std::abs(c.center.real()), sv.real()) * c.projector;
    }
    Matrix up = matrix_complex_power(a, sv, updown.theta, cfg);
    Matrix expect = plus * absa + std::exp(Cplx(0, -kPi) * sv) * (minus * absa);
    worst_sa = std::max(worst_sa, mnorm(up - expect));
  }
  s.add("matrix-kernel", "selfadjoint power decomposition", worst_sa, 1e-9, 3);

  // Normal case: Hermitian sectorial projections; range against root vectors.
  {
    Matrix h = random_matrix(rng, 5, 1.0);
    Matrix herm = 0.5 * (h + h.adjoint());
    CutPair left(kPi / 2, 3 * kPi / 2);
    Matrix pi = sectorial_projection_matrix(herm, left, cfg);
    s.add("matrix-kernel", "normal operators give Hermitian projections",
          mnorm(pi - pi.adjoint()), 1e-10);

    std::vector<Cplx> eigs = {Cplx(1.2, 0.8), Cplx(-0.9, 0.7), Cplx(0.4, -1.1), Cplx(-1.1, -0.6)};
    Matrix a = with_spectrum(rng, eigs);
    CutPair upper(kPi / 8, 7 * kPi / 8);
    Matrix p = sectorial_projection_matrix(a, upper, cfg);
    double worst_range = 0;
    int rank = 0;
    for (const auto& c : eigen_oracle(a, cfg.cluster_tolerance)) {
      bool inside = upper.sector_contains(c.center);
      if (inside) rank += c.multiplicity;
      Matrix img = p * c.projector - (inside ? c.projector : Matrix::Zero(4, 4).eval());
      worst_range = std::max(worst_range, mnorm(img));
    }
    Eigen::FullPivLU<Matrix> lu(p);
    lu.setThreshold(1e-6);
    s.add("matrix-kernel", "projection range matches enclosed root spaces", worst_range, 1e-9);
    s.add_flag("matrix-kernel", "projection rank equals enclosed multiplicity",
               lu.rank() == rank);
  }
}

// ---------------------------------------------------------------------------
// symbol-core suite

void symbol_suite(Suite& s, Rng& rng, bool full) {
  const EngineConfig& cfg = *s.cfg;

  // Exact dyadic homogeneity of stored components.
  SymbolExpansion p = battery_schroedinger(2, rng);
  SymbolExpansion d = battery_dirac_twisted(2);
  SymbolExpansion ns = battery_nonselfadjoint_order1(2, rng);
  double worst_h = 0;
  Eigen::VectorXd xi(2);
  xi << 0.625, -1.375;
  for (const SymbolExpansion* sym : {&p, &d, &ns})
    for (int j = 0; j <= sym->depth(); ++j)
      for (const auto& [f, e] : sym->components[j].modes) {
        Matrix base = sym->components[j].eval_mode(f, xi, cfg);
        Matrix twice = sym->components[j].eval_mode(f, 2 * xi, cfg);
        double scale = std::pow(2.0, sym->components[j].degree);
        worst_h = std::max(worst_h, mnorm(twice - scale * base));
      }
  s.add("symbol-core", "dyadic homogeneity is exact", worst_h, 1e-14);

  // Euler identity.
  double worst_euler = 0;
  for (const auto& omega : sample_unit_covectors(2, full ? 8 : 4, 0xe111ULL)) {
    for (int j = 0; j <= ns.depth(); ++j)
      for (const auto& [f, e] : ns.components[j].modes) {
        std::set<int> dset;
        e->collect_dirs(dset);
        for (int i = 0; i < 2; ++i) dset.insert(i);
        EvalCtx ctx = make_ctx(omega, cfg, {dset.begin(), dset.end()});
        Matrix val = e->value(ctx);
        Matrix euler = Matrix::Zero(ns.fiber_dim, ns.fiber_dim);
        for (int i = 0; i < 2; ++i) {
          MIdx alpha{0, 0, 0, 0};
          alpha[i] = 1;
          euler += omega[i] * make_derive(e, alpha)->value(ctx);
        }
        worst_euler = std::max(
            worst_euler, mnorm(euler - static_cast<double>(ns.components[j].degree) * val));
      }
  }
  s.add("symbol-core", "Euler identity at sampled fibers", worst_euler, 1e-11);

  // Associativity of the composition product (scalar triple).
  SymbolExpansion a = battery_schroedinger(2, rng);
  SymbolExpansion c = battery_schroedinger(2, rng);
  SymbolExpansion ab_c = compose(compose(a, c, 2, cfg), a, 2, cfg);
  SymbolExpansion a_bc = compose(a, compose(c, a, 2, cfg), 2, cfg);
  double worst_assoc = 0;
  for (const auto& omega : sample_unit_covectors(2, 4, 0xa550ULL))
    for (int j = 0; j <= 2; ++j) {
      std::set<Freq> freqs;
      for (const auto& [f, e] : ab_c.components[j].modes) freqs.insert(f);
      for (const auto& [f, e] : a_bc.components[j].modes) freqs.insert(f);
      for (const Freq& f : freqs)
        worst_assoc = std::max(worst_assoc, mnorm(ab_c.components[j].eval_mode(f, omega, cfg) -
                                                  a_bc.components[j].eval_mode(f, omega, cfg)));
    }
  s.add("symbol-core", "composition associativity at truncation", worst_assoc, 1e-9);

  // Leibniz consistency of the first-order term; the pair carries
  // x-dependent leading components so the derivative term is nonzero.
  SymbolExpansion la, lb;
  {
    auto trig_leading = [&](int order) {
      SymbolExpansion sym;
      sym.order = order;
      sym.fiber_dim = 1;
      sym.torus_dim = 2;
      sym.exact_beyond = true;
      HomogeneousComponent top;
      top.degree = order;
      top.fiber_dim = 1;
      top.torus_dim = 2;
      Freq e1;
      e1.k[0] = 1;
      MIdx mono{0, 0, 0, 0};
      mono[0] = order;
      top.modes[Freq::zero()] = make_term(scalar1(1.0), mono, 0);
      top.modes[e1] = make_term(scalar1(rng.complex_in_box(0.5)), mono, 0);
      HomogeneousComponent low;
      low.degree = order - 1;
      low.fiber_dim = 1;
      low.torus_dim = 2;
      MIdx mono1{0, 0, 0, 0};
      mono1[1] = order - 1;
      low.modes[e1] = make_term(scalar1(rng.complex_in_box(0.5)), mono1, 0);
      sym.components = {top, low};
      return sym;
    };
    la = trig_leading(2);
    lb = trig_leading(1);
  }
  s.add("symbol-core", "first-order composition term (hand formula)",
        leibniz_violation(la, lb, compose(la, lb, 1, cfg), cfg), 1e-12);

  // Odd-class classification.
  s.add_flag("symbol-core", "battery operators are odd-class",
             odd_class_check(a, cfg).odd_class && odd_class_check(d, cfg).odd_class &&
                 odd_class_check(ns, cfg).odd_class);
  OddClassReport bad = odd_class_check(battery_abs_xi(), cfg);
  s.add_flag("symbol-core", "|xi| fails the odd-class check",
             !bad.odd_class && std::abs(bad.max_violation - 2.0) < 1e-12);
}

// ---------------------------------------------------------------------------
// resolvent-parametrix suite

void resolvent_suite(Suite& s, Rng& rng, bool full) {
  const EngineConfig& cfg = *s.cfg;
  std::vector<SymbolExpansion> battery = {battery_schroedinger(2, rng), battery_dirac_twisted(2)};
  if (full) {
    battery.push_back(battery_t3_even_order(rng));
    battery.push_back(battery_dirac_twisted(3));
  }

  double worst_resid = 0, worst_parity = 0, worst_param = 0;
  bool closure = true;
  for (const auto& p : battery) {
    const int n = p.torus_dim;
    const int r = p.fiber_dim;
    const int m = p.order;
    ResolventPtr res = make_resolvent(p, cfg);
    int depth = full ? 4 : 3;

    SymbolExpansion binv = power_expansion(p, 1, depth, cfg);
    SymbolExpansion prod = compose(p, binv, depth, cfg);
    for (const auto& omega : sample_unit_covectors(n, 4, 0x9e5ULL))
      for (int l = 0; l <= depth; ++l)
        for (const auto& [f, e] : prod.components[l].modes) {
          Matrix v = prod.components[l].eval_mode(f, omega, cfg);
          if (l == 0 && f.is_zero()) v -= Matrix::Identity(r, r);
          worst_resid = std::max(worst_resid, mnorm(v));
        }

    closure = closure && odd_class_check(binv, cfg).odd_class;

    Cplx lambda(0.37, 0.85);
    Cplx lam_flip = (m % 2 == 0) ? lambda : -lambda;
    for (const auto& omega : sample_unit_covectors(n, 3, 0x77aULL)) {
      for (int j = 0; j <= 3; ++j) {
        auto plusm = res->component_modes(j, omega, lambda);
        auto minusm = res->component_modes(j, -omega, lam_flip);
        double sign = ((m + j) % 2 == 0) ? 1.0 : -1.0;
        for (const auto& [f, v] : plusm) {
          Matrix w = minusm.count(f) ? minusm.at(f) : Matrix::Zero(r, r).eval();
          worst_parity = std::max(worst_parity, mnorm(w - sign * v));
        }
        auto scaled = res->component_modes(j, 2.0 * omega, std::pow(2.0, m) * lambda);
        double factor = std::pow(2.0, -m - j);
        for (const auto& [f, v] : plusm) {
          Matrix w = scaled.count(f) ? scaled.at(f) : Matrix::Zero(r, r).eval();
          worst_param = std::max(worst_param, mnorm(w - factor * v));
        }
      }
    }
  }
  s.add("resolvent-parametrix", "parametrix residual p # p^{-1} - 1", worst_resid, 1e-9);
  s.add("resolvent-parametrix", "resolvent parity under (xi, lambda) reflection", worst_parity,
        1e-9, 5);
  s.add("resolvent-parametrix", "parameter homogeneity of q_{-m-j}", worst_param, 1e-10);
  s.add_flag("resolvent-parametrix", "odd-class closure of parametrices", closure);
}

// ---------------------------------------------------------------------------
// sectorial-projection suite

void projection_suite(Suite& s, Rng& rng, bool full) {
  const EngineConfig& cfg = *s.cfg;
  struct Case {
    SymbolExpansion p;
    CutPair cuts;
  };
  std::vector<Case> cases;
  cases.push_back({battery_schroedinger(2, rng), CutPair(7 * kPi / 4, 9 * kPi / 4)});
  cases.push_back({battery_dirac_twisted(2), CutPair(kPi / 2, 3 * kPi / 2)});
  cases.push_back({battery_nonselfadjoint_order1(2, rng), CutPair(kPi / 2, 3 * kPi / 2)});
  if (full) {
    cases.push_back({battery_schroedinger(3, rng), CutPair(7 * kPi / 4, 9 * kPi / 4)});
    cases.push_back({battery_dirac_twisted(3), CutPair(kPi / 2, 3 * kPi / 2)});
    cases.push_back({battery_nonselfadjoint_order1(3, rng), CutPair(kPi / 2, 3 * kPi / 2)});
  }

  const int depth = 3;
  double worst_idem = 0, worst_principal = 0, worst_compl = 0, worst_parity = 0;
  for (const auto& cse : cases) {
    const int n = cse.p.torus_dim;
    const int r = cse.p.fiber_dim;
    ResolventPtr res = make_resolvent(cse.p, cfg);
    SymbolExpansion pi = projection_expansion(res, cse.cuts, depth);
    SymbolExpansion pi2 = compose(pi, pi, depth, cfg);
    SymbolExpansion pic = projection_expansion(res, cse.cuts.complement(), depth);

    for (const auto& omega : sample_unit_covectors(n, full ? 5 : 3, 0x9a1ULL)) {
      for (int j = 0; j <= depth; ++j) {
        std::set<Freq> freqs;
        for (const auto& [f, e] : pi.components[j].modes) freqs.insert(f);
        for (const auto& [f, e] : pi2.components[j].modes) freqs.insert(f);
        for (const Freq& f : freqs) {
          Matrix a = pi2.components[j].eval_mode(f, omega, cfg);
          Matrix b = pi.components[j].eval_mode(f, omega, cfg);
          worst_idem = std::max(worst_idem, mnorm(a - b));
          Matrix sum = b + pic.components[j].eval_mode(f, omega, cfg);
          Matrix expect = (j == 0 && f.is_zero()) ? Matrix::Identity(r, r).eval()
                                                  : Matrix::Zero(r, r).eval();
          worst_compl = std::max(worst_compl, mnorm(sum - expect));
        }
      }
      Matrix p0 = pi.components[0].eval_mode(Freq::zero(), omega, cfg);
      Matrix pm = cse.p.components[0].eval_mode(Freq::zero(), omega, cfg);
      worst_principal =
          std::max(worst_principal, mnorm(p0 - sectorial_projection_matrix(pm, cse.cuts, cfg)));
    }
  }
  s.add("sectorial-projection", "symbol idempotence pi # pi = pi", worst_idem, 1e-6, 4);
  s.add("sectorial-projection", "principal symbol is the fiberwise Riesz projection",
        worst_principal, 1e-8);
  s.add("sectorial-projection", "complementary sectors sum to the identity symbol", worst_compl,
        1e-8);

  // Split-sector parity for the odd-order odd-class case.
  {
    SymbolExpansion p = battery_dirac_twisted(2);
    ResolventPtr res = make_resolvent(p, cfg);
    SymbolExpansion pi = projection_expansion(res, CutPair(kPi / 2, 3 * kPi / 2), depth);
    for (const auto& omega : sample_unit_covectors(2, 4, 0xab3ULL)) {
      Matrix p0p = pi.components[0].eval_mode(Freq::zero(), omega, cfg);
      Matrix p0m = pi.components[0].eval_mode(Freq::zero(), -omega, cfg);
      worst_parity = std::max(worst_parity, mnorm(p0m - (Matrix::Identity(2, 2) - p0p)));
      for (int j = 1; j <= depth; ++j) {
        double sign = (j % 2 == 0) ? -1.0 : 1.0;
        for (const auto& [f, e] : pi.components[j].modes)
          worst_parity =
              std::max(worst_parity, mnorm(pi.components[j].eval_mode(f, -omega, cfg) -
                                           sign * pi.components[j].eval_mode(f, omega, cfg)));
      }
    }
    s.add("sectorial-projection", "split-sector parity of pi components", worst_parity, 1e-8);
  }

  bool smoothing_ok =
      smoothing_check(battery_schroedinger(2, rng), CutPair(kPi / 4, 3 * kPi / 4), cfg) &&
      !smoothing_check(battery_dirac_twisted(2), CutPair(kPi / 2, 3 * kPi / 2), cfg);
  s.add_flag("sectorial-projection", "smoothing criterion over the cosphere scan", smoothing_ok);
}

// ---------------------------------------------------------------------------
// residue-asymmetry suite

void residue_suite(Suite& s, Rng& rng, bool full) {
  const EngineConfig& cfg = *s.cfg;

  if (full) {
    SymbolExpansion p = battery_t3_even_order(rng);
    std::vector<CutPair> cuts = {CutPair(kPi / 3, 4 * kPi / 3), CutPair(0.2, kPi / 2),
                                 CutPair(0.2, 2 * kPi - 0.2)};
    double worst = 0;
    for (const auto& rep : zeta_gap_batch(p, cuts, {-2, -1, 0, 1, 2}, torus_volume(3), cfg))
      worst = std::max(worst, std::abs(rep.gap));
    s.add("residue-asymmetry", "T^3 even-order gaps vanish for every cutting", worst, 1e-7, 6);
  }

  {
    std::vector<SymbolExpansion> battery = {battery_dirac_twisted(2),
                                            battery_nonselfadjoint_order1(2, rng)};
    CutPair updown(kPi / 2, 3 * kPi / 2);
    double worst_local = 0, worst_fast = 0, worst_wodzicki = 0;
    for (const auto& p : battery) {
      for (int k : {-1, 0, 1, 2}) {
        LocalGapDensity d = local_gap_density(p, updown, k, torus_volume(2), cfg);
        worst_local = std::max(worst_local, d.max_violation);
      }
      for (const auto& rep : zeta_gap_batch(p, {updown}, {-1, 0, 1, 2}, torus_volume(2), cfg)) {
        if (rep.fast_path) worst_fast = std::max(worst_fast, rep.fast_discrepancy);
        if (rep.k == 0) worst_wodzicki = std::max(worst_wodzicki, std::abs(rep.residue_pi_pk));
      }
    }
    s.add("residue-asymmetry", "local density identity 2 c_R = c_{P^-k}", worst_local, 1e-7, 7);
    s.add("residue-asymmetry", "split-cone gap equals i pi Res P^{-k}", worst_fast, 1e-7, 7);
    s.add("residue-asymmetry", "projection residues vanish (Wodzicki)", worst_wodzicki, 1e-7, 8);
  }

  {
    PositivityReport rep = positivity_check(battery_dirac_twisted(2), torus_volume(2), cfg);
    double expect = 4 * kPi * kPi;
    s.add("residue-asymmetry", "k = n asymmetry equals 4 pi^2 (relative)",
          std::abs(rep.gap_over_i - expect) / expect, 1e-6, 9);
    s.add_flag("residue-asymmetry", "positivity margin holds", rep.positive, 9);
    if (full) {
      // Rank-4 Clifford symbol on T^4.
      SymbolExpansion d4 = dirac_symbol(clifford_generators(4));
      PositivityReport rep4 = positivity_check(d4, torus_volume(4), cfg);
      s.add("residue-asymmetry", "T^4 Clifford positivity (route agreement)",
            std::abs(rep4.gap_over_i - rep4.direct_integral) /
                std::abs(rep4.direct_integral),
            1e-6, 9);
      s.add_flag("residue-asymmetry", "T^4 Clifford positivity margin holds", rep4.positive, 9);
    }
  }

  {
    double worst = 0, worst_imag = 0;
    for (int k : {-2, -1, 0, 1, 2}) {
      EtaResidueReport rep = eta_residue(battery_dirac_twisted(2), k, torus_volume(2), cfg);
      worst = std::max(worst, std::abs(rep.value));
      worst_imag = std::max(worst_imag, rep.imag_residual);
    }
    if (full) {
      SymbolExpansion p3 = battery_t3_selfadjoint(rng);
      for (int k : {-2, -1, 0, 1, 2, 3}) {
        EtaResidueReport rep = eta_residue(p3, k, torus_volume(3), cfg);
        worst = std::max(worst, std::abs(rep.value));
        worst_imag = std::max(worst_imag, rep.imag_residual);
      }
    }
    s.add("residue-asymmetry", "eta residues vanish for opposite parities", worst, 1e-7, 12);
    s.add("residue-asymmetry", "eta residues are real", worst_imag, 1e-10);

    EtaResidueReport counter = eta_residue(battery_abs_xi(), 2, torus_volume(2), cfg);
    s.add("residue-asymmetry", "non-odd-class |xi| keeps a nonzero eta residue",
          std::abs(counter.value - 2 * kPi), 1e-8);
  }
}

// ---------------------------------------------------------------------------
// dirac-geometry suite

std::vector<std::map<Freq, Matrix>> verify_twist(int n, Rng& rng) {
  std::vector<std::map<Freq, Matrix>> conn(n);
  double c1 = 0.3 + 0.2 * rng.uniform();
  double c2 = 0.2 + 0.2 * rng.uniform();
  Freq e2;
  e2.k[1] = 1;
  conn[0][e2] = Matrix::Constant(1, 1, 0.5 * c1);
  conn[0][-e2] = Matrix::Constant(1, 1, 0.5 * c1);
  Freq e1;
  e1.k[0] = 1;
  conn[1][e1] = Matrix::Constant(1, 1, Cplx(0, -0.5 * c2));
  conn[1][-e1] = Matrix::Constant(1, 1, Cplx(0, 0.5 * c2));
  return conn;
}

void dirac_suite(Suite& s, Rng& rng, bool full) {
  const EngineConfig& cfg = *s.cfg;

  bool relations = true;
  for (int n : {2, 4}) {
    CliffordData d = clifford_generators(n);
    int sd = d.spinor_dim();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Matrix anti = d.gamma[i] * d.gamma[j] + d.gamma[j] * d.gamma[i];
        Matrix expect =
            (i == j) ? (2.0 * Matrix::Identity(sd, sd)).eval() : Matrix::Zero(sd, sd).eval();
        relations = relations && (mnorm(anti - expect) == 0.0);
      }
  }
  s.add_flag("dirac-geometry", "Clifford relations hold exactly", relations);

  CliffordData t2 = make_clifford(2, 1, torus_volume(2), verify_twist(2, rng));
  s.add("dirac-geometry", "Lichnerowicz identity on T^2",
        lichnerowicz_square(t2, cfg).max_residual, 1e-10);

  {
    DiracAsymmetryReport r2 = dirac_asymmetry(t2, 2, cfg);
    double scale2 = std::abs(r2.heat_route);
    s.add("dirac-geometry", "k = n route agreement on T^2", r2.discrepancy / scale2, 1e-6, 10);

    if (full) {
      CliffordData t4 = make_clifford(4, 1, torus_volume(4), verify_twist(4, rng));
      s.add("dirac-geometry", "Lichnerowicz identity on twisted T^4",
            lichnerowicz_square(t4, cfg).max_residual, 1e-10);
      DiracAsymmetryReport r4 = dirac_asymmetry(t4, 4, cfg);
      double scale4 = std::abs(r4.heat_route);
      s.add("dirac-geometry", "k = n route agreement on T^4", r4.discrepancy / scale4, 1e-6, 10);
      DiracAsymmetryReport r42 = dirac_asymmetry(t4, 2, cfg);
      s.add("dirac-geometry", "flat twisted T^4 gap at k = n - 2", std::abs(r42.residue_route),
            1e-6, 11);
      s.add("dirac-geometry", "k = n - 2 heat route is exactly zero", std::abs(r42.heat_route),
            1e-12, 11);

      SymbolExpansion sq4 = lichnerowicz_square(t4, cfg).square;
      EndoDensityField c4 = residue_density_endo(power_expansion(sq4, 1, 2, cfg), t4.volume, cfg);
      HeatCoefficients h4 = heat_coefficients(t4, cfg);
      double worst = 0;
      std::set<Freq> freqs;
      for (const auto& [f, m] : c4.modes) freqs.insert(f);
      for (const auto& [f, m] : h4.a1.modes) freqs.insert(f);
      int fib = t4.fiber_dim();
      for (const Freq& f : freqs) {
        Matrix lhs = c4.modes.count(f) ? c4.modes.at(f) : Matrix::Zero(fib, fib).eval();
        Matrix rhs =
            h4.a1.modes.count(f) ? (2.0 * h4.a1.modes.at(f)).eval() : Matrix::Zero(fib, fib).eval();
        worst = std::max(worst, mnorm(lhs - rhs));
      }
      s.add("dirac-geometry", "c_{(D^2)^{-1}} equals 2 a_1 entrywise", worst, 1e-6, 11);
    }
  }

  {
    SymbolExpansion d = dirac_symbol(t2);
    DensityField c = residue_density(power_expansion(d, 1, 1, cfg), t2.volume, cfg);
    double worst = 0;
    for (const Cplx& v : c.values) worst = std::max(worst, std::abs(v));
    s.add("dirac-geometry", "traced density of D^{-1} vanishes", worst, 1e-9);
  }

  double worst_const = 0;
  for (int n : {2, 4}) {
    SphereConstantCheck c = sphere_constant_check(n, cfg);
    worst_const = std::max(worst_const, std::abs(c.quadrature - c.closed_form));
  }
  s.add("dirac-geometry", "(2 pi)^{-n} vol S^{n-1} = 2 (4 pi)^{-n/2}/Gamma(n/2)", worst_const,
        1e-12, 10);

  HeatCoefficients h = heat_coefficients(t2, cfg);
  double worst_a1 = 0;
  for (const Cplx& v : h.a1.traced().values) worst_a1 = std::max(worst_a1, std::abs(v));
  s.add("dirac-geometry", "traced a_1 vanishes on flat tori", worst_a1, 1e-13);
}

}  // namespace

// ---------------------------------------------------------------------------
// batteries

SymbolExpansion battery_schroedinger(int n, Rng& rng) {
  SymbolExpansion s;
  s.order = 2;
  s.fiber_dim = 1;
  s.torus_dim = n;
  s.exact_beyond = true;
  HomogeneousComponent c2;
  c2.degree = 2;
  c2.fiber_dim = 1;
  c2.torus_dim = n;
  c2.modes[Freq::zero()] = make_term(scalar1(1.0), {0, 0, 0, 0}, 2);
  HomogeneousComponent c1;
  c1.degree = 1;
  c1.fiber_dim = 1;
  c1.torus_dim = n;
  HomogeneousComponent c0;
  c0.degree = 0;
  c0.fiber_dim = 1;
  c0.torus_dim = n;
  double v = 0.5 + 0.4 * rng.uniform();
  Freq e1;
  e1.k[0] = 1;
  c0.modes[e1] = make_const(scalar1(0.5 * v));
  c0.modes[-e1] = make_const(scalar1(0.5 * v));
  c0.modes[Freq::zero()] = make_const(scalar1(0.3 + 0.2 * rng.uniform()));
  s.components = {c2, c1, c0};
  return s;
}

SymbolExpansion battery_dirac_twisted(int n) {
  int r = 2;
  SymbolExpansion s;
  s.order = 1;
  s.fiber_dim = r;
  s.torus_dim = n;
  s.exact_beyond = true;
  HomogeneousComponent c1;
  c1.degree = 1;
  c1.fiber_dim = r;
  c1.torus_dim = n;
  std::vector<std::pair<Cplx, XiExprPtr>> terms;
  for (int i = 0; i < std::min(n, 3); ++i) {
    MIdx mono{0, 0, 0, 0};
    mono[i] = 1;
    terms.emplace_back(Cplx(1, 0), make_term(sigma(i + 1), mono, 0));
  }
  c1.modes[Freq::zero()] = make_sum(std::move(terms), r, r);
  HomogeneousComponent c0;
  c0.degree = 0;
  c0.fiber_dim = r;
  c0.torus_dim = n;
  Freq e1;
  e1.k[0] = 1;
  c0.modes[e1] = make_const(0.25 * sigma(1));
  c0.modes[-e1] = make_const(0.25 * sigma(1));
  s.components = {c1, c0};
  return s;
}

SymbolExpansion battery_nonselfadjoint_order1(int n, Rng& rng) {
  // Traceless near-Pauli principal: spectrum +-mu(omega) close to the reals,
  // inside the split cone around the real axis.
  int r = 2;
  SymbolExpansion s;
  s.order = 1;
  s.fiber_dim = r;
  s.torus_dim = n;
  s.exact_beyond = true;
  HomogeneousComponent c1;
  c1.degree = 1;
  c1.fiber_dim = r;
  c1.torus_dim = n;
  std::vector<std::pair<Cplx, XiExprPtr>> terms;
  for (int i = 0; i < std::min(n, 3); ++i) {
    MIdx mono{0, 0, 0, 0};
    mono[i] = 1;
    Matrix m = sigma(i + 1) + (0.12 * rng.uniform()) * Cplx(0, 1) * sigma(3);
    m -= (m.trace() / 2.0) * Matrix::Identity(2, 2);
    terms.emplace_back(Cplx(1, 0), make_term(m, mono, 0));
  }
  c1.modes[Freq::zero()] = make_sum(std::move(terms), r, r);

  HomogeneousComponent c0;  // even parity, non-differential
  c0.degree = 0;
  c0.fiber_dim = r;
  c0.torus_dim = n;
  Freq e1;
  e1.k[0] = 1;
  Matrix b = random_matrix(rng, 2, 0.2);
  c0.modes[e1] = make_term(b, {1, 1, 0, 0}, -2);
  c0.modes[-e1] = make_term(b.adjoint(), {1, 1, 0, 0}, -2);
  HomogeneousComponent cm1;  // odd parity
  cm1.degree = -1;
  cm1.fiber_dim = r;
  cm1.torus_dim = n;
  cm1.modes[e1] = make_term(random_matrix(rng, 2, 0.15), {1, 0, 0, 0}, -2);
  s.components = {c1, c0, cm1};
  return s;
}

SymbolExpansion battery_t3_even_order(Rng& rng) {
  // T^3, m = 2, odd-class, non-selfadjoint, x-dependence along x1 only.
  SymbolExpansion s;
  s.order = 2;
  s.fiber_dim = 2;
  s.torus_dim = 3;
  s.exact_beyond = true;

  Matrix a(2, 2);
  a << std::polar(1.0, kPi / 6), 0.3, 0.1 * Cplx(0, 1), std::polar(1.3, 5 * kPi / 6);
  HomogeneousComponent p2;
  p2.degree = 2;
  p2.fiber_dim = 2;
  p2.torus_dim = 3;
  p2.modes[Freq::zero()] = make_term(a, {0, 0, 0, 0}, 2);

  HomogeneousComponent p1;
  p1.degree = 1;
  p1.fiber_dim = 2;
  p1.torus_dim = 3;
  Freq e1;
  e1.k[0] = 1;
  Matrix b = random_matrix(rng, 2, 0.2);
  p1.modes[e1] =
      make_sum({{Cplx(1, 0), make_term(b, {1, 0, 0, 0}, 0)},
                {rng.complex_in_box(0.3), make_term(Matrix::Identity(2, 2), {1, 1, 1, 0}, -2)}},
               2, 2);
  p1.modes[-e1] = make_sum({{Cplx(1, 0), make_term(b, {0, 1, 0, 0}, 0)}}, 2, 2);

  HomogeneousComponent p0;
  p0.degree = 0;
  p0.fiber_dim = 2;
  p0.torus_dim = 3;
  Matrix c = random_matrix(rng, 2, 0.25);
  p0.modes[e1] = make_term(c, {1, 1, 0, 0}, -2);
  p0.modes[-e1] = make_term(c, {0, 0, 2, 0}, -2);
  p0.modes[Freq::zero()] = make_term(0.2 * Matrix::Identity(2, 2), {0, 0, 0, 0}, 0);

  s.components = {p2, p1, p0};
  return s;
}

SymbolExpansion battery_t3_selfadjoint(Rng& rng) {
  // P = sum_i (D_i + A_i)^2 + W on T^3: differential, selfadjoint, odd-class.
  const int n = 3;
  const int r = 2;
  EngineConfig cfg;
  Freq e1;
  e1.k[0] = 1;
  double amp = 0.3 + 0.2 * rng.uniform();

  SymbolExpansion total;
  total.order = 2;
  total.fiber_dim = r;
  total.torus_dim = n;
  total.exact_beyond = true;
  for (int j = 0; j <= 2; ++j) {
    HomogeneousComponent c;
    c.degree = 2 - j;
    c.fiber_dim = r;
    c.torus_dim = n;
    total.components.push_back(std::move(c));
  }

  for (int i = 0; i < n; ++i) {
    SymbolExpansion si;
    si.order = 1;
    si.fiber_dim = r;
    si.torus_dim = n;
    si.exact_beyond = true;
    HomogeneousComponent s1;
    s1.degree = 1;
    s1.fiber_dim = r;
    s1.torus_dim = n;
    MIdx mono{0, 0, 0, 0};
    mono[i] = 1;
    s1.modes[Freq::zero()] = make_term(Matrix::Identity(r, r), mono, 0);
    HomogeneousComponent s0;
    s0.degree = 0;
    s0.fiber_dim = r;
    s0.torus_dim = n;
    if (i == 0) {
      s0.modes[e1] = make_const((0.5 * amp) * sigma(1));
      s0.modes[-e1] = make_const((0.5 * amp) * sigma(1));
    }
    si.components = {s1, s0};
    SymbolExpansion sq = compose(si, si, 2, cfg);
    for (int j = 0; j <= 2; ++j)
      for (const auto& [f, e] : sq.components[j].modes)
        total.components[j].add_mode(f, Cplx(1, 0), e);
  }
  total.components[2].add_mode(e1, Cplx(1, 0), make_const(0.2 * sigma(3)));
  total.components[2].add_mode(-e1, Cplx(1, 0), make_const(0.2 * sigma(3)));
  total.components[2].add_mode(Freq::zero(), Cplx(1, 0),
                               make_const(0.4 * Matrix::Identity(r, r)));
  return total;
}

SymbolExpansion battery_abs_xi() {
  HomogeneousComponent c;
  c.degree = 1;
  c.fiber_dim = 1;
  c.torus_dim = 2;
  c.modes[Freq::zero()] = make_term(scalar1(1.0), {0, 0, 0, 0}, 1);
  return single_component_expansion(c);
}

double leibniz_violation(const SymbolExpansion& a, const SymbolExpansion& b,
                         const SymbolExpansion& composed, const EngineConfig& cfg) {
  const int n = a.torus_dim;
  double worst = 0;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x[0] = 0.35;
  if (n > 1) x[1] = 1.1;
  for (const auto& omega : sample_unit_covectors(n, 4, 0x1e1bULL)) {
    Matrix hand = Matrix::Zero(a.fiber_dim, a.fiber_dim);
    for (int i = 0; i < n; ++i) {
      MIdx ax{0, 0, 0, 0}, axi{0, 0, 0, 0};
      ax[i] = 1;
      axi[i] = 1;
      HomogeneousComponent da = derive(a.components[0], {0, 0, 0, 0}, axi, cfg);
      HomogeneousComponent db = derive(b.components[0], ax, {0, 0, 0, 0}, cfg);
      hand += Cplx(0, -1) * (da.eval(x, omega, cfg) * db.eval(x, omega, cfg));
    }
    if (a.depth() >= 1)
      hand += a.components[1].eval(x, omega, cfg) * b.components[0].eval(x, omega, cfg);
    if (b.depth() >= 1)
      hand += a.components[0].eval(x, omega, cfg) * b.components[1].eval(x, omega, cfg);
    Matrix got = composed.components[1].eval(x, omega, cfg);
    worst = std::max(worst, mnorm(got - hand));
  }
  return worst;
}

VerifyReport run_verify(std::uint64_t seed, const std::string& level, const EngineConfig& cfg) {
  if (level != "quick" && level != "full")
    fail(ErrorCode::SchemaError, "verify level must be quick or full");
  bool full = level == "full";
  Suite s;
  s.cfg = &cfg;
  s.report.seed = seed;
  s.report.level = level;

  Rng rng(seed ^ 0x5eedf00dULL);
  matrix_suite(s, rng, full);
  symbol_suite(s, rng, full);
  resolvent_suite(s, rng, full);
  projection_suite(s, rng, full);
  residue_suite(s, rng, full);
  dirac_suite(s, rng, full);
  return s.report;
}

VerifyReport run_suite(const std::string& module, std::uint64_t seed, const EngineConfig& cfg) {
  Suite s;
  s.cfg = &cfg;
  s.report.seed = seed;
  s.report.level = "full";
  Rng rng(seed ^ 0x5eedf00dULL);
  if (module == "matrix-kernel")
    matrix_suite(s, rng, true);
  else if (module == "symbol-core")
    symbol_suite(s, rng, true);
  else if (module == "resolvent-parametrix")
    resolvent_suite(s, rng, true);
  else if (module == "sectorial-projection")
    projection_suite(s, rng, true);
  else if (module == "residue-asymmetry")
    residue_suite(s, rng, true);
  else if (module == "dirac-geometry")
    dirac_suite(s, rng, true);
  else
    fail(ErrorCode::SchemaError, "unknown suite: " + module);
  return s.report;
}

}  // namespace spa
