#include "core/residue.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "core/compensated.hpp"
#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace spa {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double two_pi_pow(int n) {
  double r = 1;
  for (int i = 0; i < n; ++i) r *= 2.0 * kPi;
  return r;
}

template <typename Field, typename Value>
void synthesize(Field& field, const std::map<Freq, Value>& modes, int n) {
  field.grid = std::vector<int>(n, 1);
  for (const auto& [f, v] : modes)
    for (int i = 0; i < n; ++i) field.grid[i] = std::max(field.grid[i], 2 * std::abs(f.k[i]) + 1);
  int total = 1;
  for (int g : field.grid) total *= g;
  field.values.assign(total, Value());
  std::vector<int> idx(n, 0);
  for (int p = 0; p < total; ++p) {
    Value v{};
    bool first = true;
    for (const auto& [f, coef] : modes) {
      double phase = 0;
      for (int i = 0; i < n; ++i) phase += f.k[i] * (2.0 * kPi * idx[i] / field.grid[i]);
      if (first) {
        v = std::polar(1.0, phase) * coef;
        first = false;
      } else {
        v += std::polar(1.0, phase) * coef;
      }
    }
    if (!modes.empty()) field.values[p] = v;
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < field.grid[i]) break;
      idx[i] = 0;
    }
  }
}

std::vector<int> union_dirs(const std::vector<SweepTask>& tasks) {
  std::set<int> d;
  for (const auto& t : tasks)
    for (const auto& [f, e] : t.comp->modes) {
      e->collect_dirs(d);
      for (int i = 0; i < 4; ++i)
        if (f.k[i] != 0) d.insert(i);
    }
  return {d.begin(), d.end()};
}

}  // namespace

Cplx DensityField::integral() const {
  auto it = modes.find(Freq::zero());
  return it == modes.end() ? Cplx(0, 0) : it->second * volume;
}

Matrix EndoDensityField::integral() const {
  auto it = modes.find(Freq::zero());
  if (it == modes.end()) return Matrix();
  return it->second * volume;
}

DensityField EndoDensityField::traced() const {
  DensityField out;
  out.torus_dim = torus_dim;
  out.volume = volume;
  out.grid = grid;
  out.values.reserve(values.size());
  for (const Matrix& m : values) out.values.push_back(m.trace());
  for (const auto& [f, m] : modes) out.modes[f] = m.trace();
  return out;
}

CosphereGrid residue_grid(int n, const EngineConfig& cfg) {
  if (n == 2) return cosphere_grid(2, cfg.circle_nodes);
  if (n == 3) return cosphere_grid(3, cfg.sphere_polar_nodes, cfg.sphere_azimuth_nodes);
  return cosphere_grid(4, cfg.s3_chi_nodes, cfg.s3_theta_nodes, cfg.s3_phi_nodes);
}

std::vector<std::map<Freq, Matrix>> cosphere_sweep(const std::vector<SweepTask>& tasks,
                                                   const CosphereGrid& grid,
                                                   const std::vector<int>& dirs,
                                                   const EngineConfig& cfg) {
  const int npts = grid.size();
  std::vector<std::vector<std::vector<Matrix>>> per_point(npts);
  // Mode lists are static per task; fix the order once.
  std::vector<std::vector<Freq>> freq_order(tasks.size());
  for (size_t t = 0; t < tasks.size(); ++t)
    for (const auto& [f, e] : tasks[t].comp->modes) freq_order[t].push_back(f);

  parallel_for(npts, cfg.effective_threads(), [&](int i) {
    EvalCtx ctx = make_ctx(grid.points[i], cfg, dirs);
    std::vector<std::vector<Matrix>> vals(tasks.size());
    for (size_t t = 0; t < tasks.size(); ++t) {
      vals[t].reserve(freq_order[t].size());
      for (const auto& [f, e] : tasks[t].comp->modes) vals[t].push_back(e->value(ctx));
    }
    per_point[i] = std::move(vals);
  });

  std::vector<std::map<Freq, Matrix>> out(tasks.size());
  for (size_t t = 0; t < tasks.size(); ++t) {
    const int r = tasks[t].comp->fiber_dim;
    for (size_t fi = 0; fi < freq_order[t].size(); ++fi) {
      KahanMatrixSum acc(r, r);
      for (int i = 0; i < npts; ++i) acc.add(grid.weights[i] * per_point[i][t][fi]);
      out[t][freq_order[t][fi]] = acc.value();
    }
  }
  return out;
}

namespace {

// Degree -n component index, or -1 when the density vanishes identically.
int density_component_index(const SymbolExpansion& q) {
  const int n = q.torus_dim;
  if (-n > q.order) return -1;  // expansion starts below the residue degree
  int l = q.order + n;
  if (l > q.depth()) {
    if (q.exact_beyond) return -1;
    fail(ErrorCode::DepthInsufficient,
         "degree -n lies below the available truncation depth");
  }
  return l;
}

EndoDensityField density_from_modes(const std::map<Freq, Matrix>& raw, int n, double volume) {
  EndoDensityField field;
  field.torus_dim = n;
  field.volume = volume;
  double scale = 1.0 / two_pi_pow(n);
  for (const auto& [f, m] : raw) field.modes[f] = scale * m;
  synthesize(field, field.modes, n);
  return field;
}

}  // namespace

EndoDensityField residue_density_endo(const SymbolExpansion& q, double volume,
                                      const EngineConfig& cfg) {
  const int n = q.torus_dim;
  int l = density_component_index(q);
  if (l < 0) {
    EndoDensityField zero;
    zero.torus_dim = n;
    zero.volume = volume;
    zero.grid = std::vector<int>(n, 1);
    zero.values = {Matrix::Zero(q.fiber_dim, q.fiber_dim)};
    zero.modes[Freq::zero()] = Matrix::Zero(q.fiber_dim, q.fiber_dim);
    return zero;
  }
  const HomogeneousComponent& comp = q.components[l];
  std::vector<SweepTask> tasks{{&comp}};
  auto integrals = cosphere_sweep(tasks, residue_grid(n, cfg), union_dirs(tasks), cfg);
  return density_from_modes(integrals[0], n, volume);
}

DensityField residue_density(const SymbolExpansion& q, double volume, const EngineConfig& cfg) {
  return residue_density_endo(q, volume, cfg).traced();
}

Cplx res_total(const SymbolExpansion& q, double volume, const EngineConfig& cfg) {
  return residue_density(q, volume, cfg).integral();
}

namespace {

// Split-cone hypothesis of the odd-order reduction: every principal
// eigenvalue lies in (theta, theta') u (theta + pi, theta' + pi) mod 2pi.
bool split_cone_scan(const SymbolExpansion& p, const CutPair& cuts, const EngineConfig& cfg) {
  std::vector<Eigen::VectorXd> pts = sample_unit_covectors(p.torus_dim, 64, 0xc0defULL);
  const HomogeneousComponent& pm = p.components[0];
  double t = std::fmod(cuts.theta + kPi, 2 * kPi);
  CutPair shifted(t, t + (cuts.theta_prime - cuts.theta));
  for (const auto& omega : pts) {
    Matrix a = pm.eval_mode(Freq::zero(), omega, cfg);
    for (const Cplx& ev : eigenvalues_of(a))
      if (!cuts.sector_contains(ev) && !shifted.sector_contains(ev)) return false;
  }
  return true;
}

}  // namespace

std::vector<AsymmetryReport> zeta_gap_batch(const SymbolExpansion& p,
                                            const std::vector<CutPair>& cuts,
                                            const std::vector<int>& ks, double volume,
                                            const EngineConfig& cfg) {
  const int n = p.torus_dim;
  const int m = p.order;
  if (m < 1) fail(ErrorCode::ComputationError, "zeta gaps require a positive-order operator");

  ResolventPtr res = make_resolvent(p, cfg);
  bool p_odd_class = odd_class_check(p, cfg).odd_class;

  // Depth needed per exponent; negative means the residue degree is absent.
  std::map<int, int> level;
  int lmax = -1;
  for (int k : ks) {
    level[k] = n - k * m;
    lmax = std::max(lmax, level[k]);
  }
  if (lmax >= 0) {
    res->set_depth_hint(lmax);
    res->set_budget_hint(lmax);
  }

  std::map<int, SymbolExpansion> powers;
  for (int k : ks)
    if (level[k] >= 0 && !powers.count(k)) powers.emplace(k, power_expansion(p, k, level[k], cfg));

  std::vector<SymbolExpansion> pi_syms;
  std::deque<SymbolExpansion> composed;  // stable storage: tasks hold pointers
  struct Slot {
    int cut_index;
    int k;
    int task_r = -1;   // composed Pi P^{-k} component
    int task_pk = -1;  // P^{-k} component
  };
  std::vector<Slot> slots;
  std::vector<SweepTask> tasks;
  std::map<int, int> pk_task;

  if (lmax >= 0)
    for (size_t ci = 0; ci < cuts.size(); ++ci)
      pi_syms.push_back(projection_expansion(res, cuts[ci], lmax));
  for (size_t ci = 0; ci < cuts.size(); ++ci) {
    for (int k : ks) {
      Slot slot{static_cast<int>(ci), k};
      int l = level[k];
      if (l >= 0) {
        composed.push_back(compose(pi_syms[ci], powers.at(k), l, cfg));
        slot.task_r = static_cast<int>(tasks.size());
        tasks.push_back({&composed.back().components[l]});
        if (!pk_task.count(k)) {
          int idx = density_component_index(powers.at(k));
          if (idx >= 0) {
            pk_task[k] = static_cast<int>(tasks.size());
            tasks.push_back({&powers.at(k).components[idx]});
          } else {
            pk_task[k] = -1;
          }
        }
        slot.task_pk = pk_task[k];
      }
      slots.push_back(slot);
    }
  }

  std::vector<std::map<Freq, Matrix>> integrals;
  if (!tasks.empty())
    integrals = cosphere_sweep(tasks, residue_grid(n, cfg), union_dirs(tasks), cfg);

  double inv2pin = 1.0 / two_pi_pow(n);
  auto traced_total = [&](int task) -> Cplx {
    if (task < 0) return 0;
    auto it = integrals[task].find(Freq::zero());
    if (it == integrals[task].end()) return 0;
    return it->second.trace() * inv2pin * volume;
  };

  std::vector<AsymmetryReport> out;
  for (const Slot& slot : slots) {
    AsymmetryReport rep;
    rep.theta = cuts[slot.cut_index].theta;
    rep.theta_prime = cuts[slot.cut_index].theta_prime;
    rep.k = slot.k;
    rep.depth = std::max(level[slot.k], 0);
    rep.tol = cfg.contour_tol;
    rep.residue_pi_pk = traced_total(slot.task_r);
    rep.residue_pk = traced_total(slot.task_pk);
    rep.gap = Cplx(0, 2 * kPi / m) * rep.residue_pi_pk;
    rep.fast_path = p_odd_class && (std::abs(m) % 2 == 1) && (n % 2 == 0) &&
                    split_cone_scan(p, cuts[slot.cut_index], cfg);
    if (rep.fast_path) {
      rep.fast_gap = Cplx(0, kPi / m) * rep.residue_pk;
      rep.fast_discrepancy = std::abs(rep.gap - rep.fast_gap);
    }
    out.push_back(rep);
  }
  return out;
}

AsymmetryReport zeta_gap(const SymbolExpansion& p, const CutPair& cuts, int k, double volume,
                         const EngineConfig& cfg) {
  return zeta_gap_batch(p, {cuts}, {k}, volume, cfg)[0];
}

LocalGapDensity local_gap_density(const SymbolExpansion& p, const CutPair& cuts, int k,
                                  double volume, const EngineConfig& cfg) {
  const int n = p.torus_dim;
  const int m = p.order;
  int l = n - k * m;
  LocalGapDensity out;

  ResolventPtr res = make_resolvent(p, cfg);
  if (l < 0) {
    DensityField z;
    z.torus_dim = n;
    z.volume = volume;
    z.grid = std::vector<int>(n, 1);
    z.values = {Cplx(0, 0)};
    z.modes[Freq::zero()] = 0;
    out.twice_r_density = z;
    out.pk_density = z;
    out.max_violation = 0;
    return out;
  }

  res->set_depth_hint(l);
  res->set_budget_hint(l);
  SymbolExpansion pk = power_expansion(p, k, l, cfg);
  SymbolExpansion pi = projection_expansion(res, cuts, l);
  SymbolExpansion r = compose(pi, pk, l, cfg);

  std::vector<SweepTask> tasks;
  tasks.push_back({&r.components[l]});
  int pk_idx = density_component_index(pk);
  if (pk_idx >= 0) tasks.push_back({&pk.components[pk_idx]});

  auto integrals = cosphere_sweep(tasks, residue_grid(n, cfg), union_dirs(tasks), cfg);
  EndoDensityField rf = density_from_modes(integrals[0], n, volume);
  std::map<Freq, Matrix> pk_modes;
  if (pk_idx >= 0) pk_modes = integrals[1];
  EndoDensityField pkf = density_from_modes(pk_modes, n, volume);

  // Common grid for the pointwise comparison.
  std::map<Freq, Cplx> rmodes, pmodes;
  for (const auto& [f, v] : rf.modes) rmodes[f] = 2.0 * v.trace();
  for (const auto& [f, v] : pkf.modes) pmodes[f] = v.trace();
  std::map<Freq, Cplx> diff = rmodes;
  for (auto& [f, v] : diff) v = 0;
  for (const auto& [f, v] : rmodes) diff[f] += v;
  for (const auto& [f, v] : pmodes) diff[f] -= v;

  DensityField twice_r;
  twice_r.torus_dim = n;
  twice_r.volume = volume;
  synthesize(twice_r, rmodes, n);
  twice_r.modes = rmodes;
  DensityField pkd;
  pkd.torus_dim = n;
  pkd.volume = volume;
  synthesize(pkd, pmodes, n);
  pkd.modes = pmodes;

  DensityField diff_field;
  diff_field.torus_dim = n;
  diff_field.volume = volume;
  synthesize(diff_field, diff, n);
  double viol = 0;
  for (const Cplx& v : diff_field.values) viol = std::max(viol, std::abs(v));

  out.twice_r_density = std::move(twice_r);
  out.pk_density = std::move(pkd);
  out.max_violation = viol;
  return out;
}

namespace {

void certify_selfadjoint(const SymbolExpansion& p, const EngineConfig& cfg) {
  std::vector<Eigen::VectorXd> pts = sample_unit_covectors(p.torus_dim, 32, 0xad501ULL);
  const HomogeneousComponent& pm = p.components[0];
  double worst = 0;
  for (const auto& omega : pts) {
    Matrix a = pm.eval_mode(Freq::zero(), omega, cfg);
    worst = std::max(worst, (a - a.adjoint()).cwiseAbs().maxCoeff());
  }
  if (worst > 1e-9)
    fail(ErrorCode::NotSelfadjoint, "principal symbol is not Hermitian on sampled fibers");
}

}  // namespace

EtaResidueReport eta_residue(const SymbolExpansion& p, int k, double volume,
                             const EngineConfig& cfg) {
  certify_selfadjoint(p, cfg);
  CutPair updown(kPi / 2, 3 * kPi / 2);
  AsymmetryReport rep = zeta_gap(p, updown, k, volume, cfg);
  Cplx value = (rep.residue_pk - 2.0 * rep.residue_pi_pk) / static_cast<double>(p.order);
  EtaResidueReport out;
  out.value = value.real();
  out.imag_residual = std::abs(value.imag());
  out.residue_pk = rep.residue_pk;
  out.residue_pi_pk = rep.residue_pi_pk;
  return out;
}

PositivityReport positivity_check(const SymbolExpansion& p, double volume,
                                  const EngineConfig& cfg) {
  const int n = p.torus_dim;
  if (n % 2 != 0)
    fail(ErrorCode::ComputationError, "positivity statement needs an even-dimensional torus");
  if (p.order != 1) fail(ErrorCode::ComputationError, "positivity statement needs order 1");
  certify_selfadjoint(p, cfg);
  if (!odd_class_check(p, cfg).odd_class)
    fail(ErrorCode::ComputationError, "positivity statement needs an odd-class symbol");

  CutPair updown(kPi / 2, 3 * kPi / 2);
  AsymmetryReport rep = zeta_gap(p, updown, n, volume, cfg);
  PositivityReport out;
  out.gap_over_i = (rep.gap / Cplx(0, 1)).real();

  // Independent route: pi (2pi)^{-n} int tr p_m^{-n}.
  CosphereGrid grid = residue_grid(n, cfg);
  const HomogeneousComponent& pm = p.components[0];
  KahanSum acc;
  for (int i = 0; i < grid.size(); ++i) {
    Matrix a = pm.eval_mode(Freq::zero(), grid.points[i], cfg);
    Matrix ainv = a.partialPivLu().solve(Matrix::Identity(a.rows(), a.cols()));
    Matrix power = Matrix::Identity(a.rows(), a.cols());
    for (int rep2 = 0; rep2 < n; ++rep2) power = power * ainv;
    acc.add(grid.weights[i] * power.trace().real());
  }
  out.direct_integral = kPi / two_pi_pow(n) * volume * acc.value();
  out.margin = cfg.positivity_floor * std::abs(out.direct_integral);
  out.positive = out.gap_over_i > out.margin;
  return out;
}

}  // namespace spa
