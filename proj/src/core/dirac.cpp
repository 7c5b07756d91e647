#include "core/dirac.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace spa {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix pauli(int i) {
  Matrix m(2, 2);
  if (i == 1)
    m << 0, 1, 1, 0;
  else if (i == 2)
    m << 0, Cplx(0, -1), Cplx(0, 1), 0;
  else
    m << 1, 0, 0, -1;
  return m;
}

double factorial(int k) {
  double r = 1;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

double two_pi_pow(int n) {
  double r = 1;
  for (int i = 0; i < n; ++i) r *= 2.0 * kPi;
  return r;
}

}  // namespace

CliffordData clifford_generators(int n) {
  if (n != 2 && n != 4)
    fail(ErrorCode::UnsupportedDimension, "Clifford generators provided for n in {2, 4}");
  CliffordData d;
  d.n = n;
  d.twist_rank = 1;
  d.volume = two_pi_pow(n);
  if (n == 2) {
    d.gamma = {pauli(1), pauli(2)};
    d.chirality = pauli(3);
  } else {
    Matrix id2 = Matrix::Identity(2, 2);
    d.gamma = {kron(pauli(1), id2), kron(pauli(2), id2), kron(pauli(3), pauli(1)),
               kron(pauli(3), pauli(2))};
    d.chirality = kron(pauli(3), pauli(3));
  }
  d.connection.assign(n, {});
  return d;
}

CliffordData make_clifford(int n, int twist_rank, double volume,
                           std::vector<std::map<Freq, Matrix>> connection) {
  CliffordData d = clifford_generators(n);
  d.twist_rank = twist_rank;
  d.volume = volume;
  if (connection.empty()) connection.assign(n, {});
  if (static_cast<int>(connection.size()) != n)
    fail(ErrorCode::SchemaError, "twist connection needs one matrix field per direction");
  for (const auto& field : connection) {
    for (const auto& [f, m] : field) {
      if (m.rows() != twist_rank || m.cols() != twist_rank)
        fail(ErrorCode::SchemaError, "twist coefficient size differs from the twist rank");
      auto it = field.find(-f);
      if (it == field.end() || (it->second - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        fail(ErrorCode::SchemaError,
             "twist connection must be Hermitian: A[-k] = A[k]^* is required");
    }
  }
  d.connection = std::move(connection);
  return d;
}

TwistCurvature twist_curvature(const CliffordData& d) {
  TwistCurvature out;
  for (int i = 0; i < d.n; ++i) {
    for (int j = i + 1; j < d.n; ++j) {
      std::map<Freq, Matrix> f;
      auto add = [&](const Freq& k, const Matrix& m) {
        auto it = f.find(k);
        if (it == f.end())
          f[k] = m;
        else
          it->second += m;
      };
      // d_i A_j - d_j A_i on Fourier data.
      for (const auto& [k, m] : d.connection[j]) add(k, Cplx(0, 1) * double(k.k[i]) * m);
      for (const auto& [k, m] : d.connection[i]) add(k, Cplx(0, -1) * double(k.k[j]) * m);
      // i [A_i, A_j] by mode convolution.
      for (const auto& [ka, ma] : d.connection[i])
        for (const auto& [kb, mb] : d.connection[j])
          add(ka + kb, Cplx(0, 1) * (ma * mb - mb * ma));
      for (auto it = f.begin(); it != f.end();) {
        if (it->second.cwiseAbs().maxCoeff() < 1e-15)
          it = f.erase(it);
        else
          ++it;
      }
      if (!f.empty()) out.entries[{i, j}] = std::move(f);
    }
  }
  return out;
}

SymbolExpansion dirac_symbol(const CliffordData& d) {
  const int n = d.n;
  const int fib = d.fiber_dim();
  Matrix idt = Matrix::Identity(d.twist_rank, d.twist_rank);

  SymbolExpansion s;
  s.order = 1;
  s.fiber_dim = fib;
  s.torus_dim = n;
  s.exact_beyond = true;

  HomogeneousComponent p1;
  p1.degree = 1;
  p1.fiber_dim = fib;
  p1.torus_dim = n;
  {
    std::vector<std::pair<Cplx, XiExprPtr>> terms;
    for (int i = 0; i < n; ++i) {
      MIdx mono{0, 0, 0, 0};
      mono[i] = 1;
      terms.emplace_back(Cplx(1, 0), make_term(kron(d.gamma[i], idt), mono, 0));
    }
    p1.modes[Freq::zero()] = make_sum(std::move(terms), fib, fib);
  }
  s.components.push_back(std::move(p1));

  HomogeneousComponent p0;
  p0.degree = 0;
  p0.fiber_dim = fib;
  p0.torus_dim = n;
  std::map<Freq, Matrix> mode_sum;
  for (int i = 0; i < n; ++i)
    for (const auto& [k, a] : d.connection[i]) {
      Matrix contrib = kron(d.gamma[i], a);
      auto it = mode_sum.find(k);
      if (it == mode_sum.end())
        mode_sum[k] = contrib;
      else
        it->second += contrib;
    }
  for (const auto& [k, m] : mode_sum) p0.modes[k] = make_const(m);
  s.components.push_back(std::move(p0));
  return s;
}

HomogeneousComponent clifford_curvature_term(const CliffordData& d) {
  TwistCurvature f = twist_curvature(d);
  HomogeneousComponent c;
  c.degree = 0;
  c.fiber_dim = d.fiber_dim();
  c.torus_dim = d.n;
  std::map<Freq, Matrix> modes;
  for (const auto& [ij, field] : f.entries) {
    Matrix gg = d.gamma[ij.first] * d.gamma[ij.second];
    for (const auto& [k, m] : field) {
      Matrix contrib = Cplx(0, -1) * kron(gg, m);
      auto it = modes.find(k);
      if (it == modes.end())
        modes[k] = contrib;
      else
        it->second += contrib;
    }
  }
  for (const auto& [k, m] : modes) c.modes[k] = make_const(m);
  return c;
}

namespace {

// Adds a component into the matching degree slot of an expansion.
void add_component(SymbolExpansion& s, const HomogeneousComponent& c) {
  int j = s.order - c.degree;
  while (s.depth() < j) {
    HomogeneousComponent zero;
    zero.degree = s.order - s.depth() - 1;
    zero.fiber_dim = s.fiber_dim;
    zero.torus_dim = s.torus_dim;
    s.components.push_back(std::move(zero));
  }
  for (const auto& [f, e] : c.modes) s.components[j].add_mode(f, Cplx(1, 0), e);
}

}  // namespace

LichnerowiczReport lichnerowicz_square(const CliffordData& d, const EngineConfig& cfg) {
  const int n = d.n;
  const int fib = d.fiber_dim();
  SymbolExpansion dd = dirac_symbol(d);

  LichnerowiczReport rep;
  rep.square = compose(dd, dd, 2, cfg);

  // Connection Laplacian sum_i (D_i + A_i)^2 composed factor by factor.
  Matrix ids = Matrix::Identity(d.spinor_dim(), d.spinor_dim());
  SymbolExpansion target;
  target.order = 2;
  target.fiber_dim = fib;
  target.torus_dim = n;
  target.exact_beyond = true;
  for (int j = 0; j <= 2; ++j) {
    HomogeneousComponent c;
    c.degree = 2 - j;
    c.fiber_dim = fib;
    c.torus_dim = n;
    target.components.push_back(std::move(c));
  }
  for (int i = 0; i < n; ++i) {
    SymbolExpansion si;
    si.order = 1;
    si.fiber_dim = fib;
    si.torus_dim = n;
    si.exact_beyond = true;
    HomogeneousComponent s1;
    s1.degree = 1;
    s1.fiber_dim = fib;
    s1.torus_dim = n;
    MIdx mono{0, 0, 0, 0};
    mono[i] = 1;
    s1.modes[Freq::zero()] = make_term(Matrix::Identity(fib, fib), mono, 0);
    HomogeneousComponent s0;
    s0.degree = 0;
    s0.fiber_dim = fib;
    s0.torus_dim = n;
    for (const auto& [k, a] : d.connection[i]) s0.modes[k] = make_const(kron(ids, a));
    si.components.push_back(std::move(s1));
    si.components.push_back(std::move(s0));
    SymbolExpansion sq = compose(si, si, 2, cfg);
    for (const auto& comp : sq.components) add_component(target, comp);
  }
  add_component(target, clifford_curvature_term(d));
  rep.laplacian_plus_cf = std::move(target);

  // Componentwise residual over sampled fibers and the full mode set.
  std::vector<Eigen::VectorXd> pts = sample_unit_covectors(n, 8, 0x11c4ULL);
  double worst = 0;
  for (int j = 0; j <= 2; ++j) {
    std::set<Freq> freqs;
    for (const auto& [f, e] : rep.square.components[j].modes) freqs.insert(f);
    for (const auto& [f, e] : rep.laplacian_plus_cf.components[j].modes) freqs.insert(f);
    for (const Freq& f : freqs)
      for (const auto& xi : pts) {
        Matrix a = rep.square.components[j].eval_mode(f, xi, cfg);
        Matrix b = rep.laplacian_plus_cf.components[j].eval_mode(f, xi, cfg);
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
      }
  }
  rep.max_residual = worst;
  return rep;
}

HeatCoefficients heat_coefficients(const CliffordData& d, const EngineConfig& cfg) {
  const int n = d.n;
  const int fib = d.fiber_dim();
  double c0 = std::pow(4.0 * kPi, -n / 2.0);

  HeatCoefficients out;
  out.a0.torus_dim = n;
  out.a0.volume = d.volume;
  out.a0.modes[Freq::zero()] = c0 * Matrix::Identity(fib, fib);
  out.a0.grid = std::vector<int>(n, 1);
  out.a0.values = {c0 * Matrix::Identity(fib, fib)};

  // a1 = -(4 pi)^{-n/2} (r_M/12 id + c(F)); flat torus: r_M = 0.  The c(F)
  // coefficient is pinned by the Duhamel expansion of e^{-t(Lap + E)} and
  // cross-checked against the parametrix route entrywise.
  HomogeneousComponent cf = clifford_curvature_term(d);
  out.a1.torus_dim = n;
  out.a1.volume = d.volume;
  std::vector<int> grid(n, 1);
  for (const auto& [f, e] : cf.modes)
    for (int i = 0; i < n; ++i) grid[i] = std::max(grid[i], 2 * std::abs(f.k[i]) + 1);
  out.a1.grid = grid;
  std::map<Freq, Matrix> cf_modes;
  {
    EvalCtx dummy = make_ctx(Eigen::VectorXd::Ones(n), cfg);
    for (const auto& [f, e] : cf.modes) cf_modes[f] = -c0 * e->value(dummy);
  }
  out.a1.modes = cf_modes;
  int total = 1;
  for (int g : grid) total *= g;
  out.a1.values.assign(total, Matrix::Zero(fib, fib));
  std::vector<int> idx(n, 0);
  for (int p = 0; p < total; ++p) {
    Matrix v = Matrix::Zero(fib, fib);
    for (const auto& [f, m] : cf_modes) {
      double phase = 0;
      for (int i = 0; i < n; ++i) phase += f.k[i] * (2.0 * kPi * idx[i] / grid[i]);
      v += std::polar(1.0, phase) * m;
    }
    out.a1.values[p] = v;
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < grid[i]) break;
      idx[i] = 0;
    }
  }
  return out;
}

DiracAsymmetryReport dirac_asymmetry(const CliffordData& d, int k, const EngineConfig& cfg) {
  const int n = d.n;
  DiracAsymmetryReport rep;
  rep.k = k;

  if (k % 2 != 0) {
    rep.mechanism =
        "odd power: D^{-k} anticommutes with the grading, so the traced density vanishes";
    return rep;
  }
  if (k < 2 || k > n) {
    rep.mechanism = "even power outside [2, n]: both zeta functions are regular with equal values";
    return rep;
  }

  SymbolExpansion ds = dirac_symbol(d);
  SymbolExpansion power = power_expansion(ds, k, n - k, cfg);
  Cplx res = res_total(power, d.volume, cfg);
  rep.residue_route = Cplx(0, kPi) * res;

  int l = k / 2;
  int heat_index = n / 2 - l;
  if (heat_index == 0) {
    HeatCoefficients h = heat_coefficients(d, cfg);
    Cplx tr_a0 = h.a0.integral().trace();
    rep.heat_route = Cplx(0, kPi) * (2.0 / factorial(l - 1)) * tr_a0;
    rep.heat_route_available = true;
  } else if (heat_index == 1) {
    HeatCoefficients h = heat_coefficients(d, cfg);
    Cplx tr_a1 = h.a1.integral().trace();
    rep.heat_route = Cplx(0, kPi) * (2.0 / factorial(l - 1)) * tr_a1;
    rep.heat_route_available = true;
  } else {
    rep.mechanism = "heat coefficients a_j with j >= 2 are out of engine scope";
    rep.heat_route_available = false;
  }
  if (rep.heat_route_available) rep.discrepancy = std::abs(rep.residue_route - rep.heat_route);
  return rep;
}

SphereConstantCheck sphere_constant_check(int n, const EngineConfig& cfg) {
  CosphereGrid grid = residue_grid(n, cfg);
  double vol = 0;
  for (double w : grid.weights) vol += w;
  SphereConstantCheck out;
  out.quadrature = vol / two_pi_pow(n);
  double gamma_half_n = 1.0;  // Gamma(1) = Gamma(2) = 1 for n in {2, 4}
  out.closed_form = 2.0 * std::pow(4.0 * kPi, -n / 2.0) / gamma_half_n;
  return out;
}

}  // namespace spa
