#include "core/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>

#include "core/errors.hpp"

namespace spa {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

Json complex_json(Cplx z) {
  Json j;
  j["re"] = z.real();
  j["im"] = z.imag();
  return j;
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(i, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void add_property(std::vector<PropertyResult>& props, const std::string& module,
                  const std::string& name, double measured, double tol) {
  props.push_back({module, name, measured, tol, measured <= tol, 0});
}

ExperimentReport run_symbolic(const OperatorSpec& spec) {
  ExperimentReport rep;
  rep.name = spec.name;
  rep.kind = spec.kind;

  OddClassReport odd = odd_class_check(spec.symbol, spec.cfg);
  EllipticityReport ell = ellipticity_scan(spec.symbol, spec.cfg);
  rep.extras["certificates"]["oddClass"] = odd.odd_class;
  rep.extras["certificates"]["oddClassViolation"] = odd.max_violation;
  rep.extras["certificates"]["minSingularValue"] = ell.min_singular;
  rep.extras["certificates"]["scanPoints"] = ell.scan_points;
  add_property(rep.properties, "resolvent-parametrix", "cosphere ellipticity certificate",
               ell.elliptic ? 0.0 : 1.0, 0.5);

  if (!spec.cut_pairs.empty() && !spec.k_list.empty()) {
    rep.rows = zeta_gap_batch(spec.symbol, spec.cut_pairs, spec.k_list, spec.volume, spec.cfg);
    for (auto& row : rep.rows) row.operator_id = spec.name;
    double worst_fast = 0;
    for (const auto& row : rep.rows)
      if (row.fast_path)
        worst_fast = std::max(worst_fast,
                              row.fast_discrepancy / std::max(1.0, std::abs(row.fast_gap)));
    add_property(rep.properties, "residue-asymmetry", "split-cone route agreement", worst_fast,
                 1e-6);
  }
  return rep;
}

ExperimentReport run_dirac(const OperatorSpec& spec) {
  ExperimentReport rep;
  rep.name = spec.name;
  rep.kind = spec.kind;
  const CliffordData& d = spec.dirac;

  LichnerowiczReport lich = lichnerowicz_square(d, spec.cfg);
  add_property(rep.properties, "dirac-geometry", "Lichnerowicz identity residual",
               lich.max_residual, 1e-10);

  SphereConstantCheck constant = sphere_constant_check(d.n, spec.cfg);
  add_property(rep.properties, "dirac-geometry", "cosphere volume constant",
               std::abs(constant.quadrature - constant.closed_form), 1e-12);

  HeatCoefficients heat = heat_coefficients(d, spec.cfg);
  double worst_a1 = 0;
  for (const Cplx& v : heat.a1.traced().values) worst_a1 = std::max(worst_a1, std::abs(v));
  add_property(rep.properties, "dirac-geometry", "traced a_1 vanishes (flat)", worst_a1, 1e-13);
  rep.extras["heat"]["a0Trace"] = complex_json(heat.a0.integral().trace());

  std::vector<int> ks = spec.k_list;
  if (ks.empty())
    for (int k = 2; k <= d.n; k += 2) ks.push_back(k);

  double worst_route = 0;
  for (int k : ks) {
    DiracAsymmetryReport dr = dirac_asymmetry(d, k, spec.cfg);
    AsymmetryReport row;
    row.operator_id = spec.name;
    row.theta = kPi / 2;
    row.theta_prime = 3 * kPi / 2;
    row.k = k;
    row.gap = dr.residue_route;
    row.residue_pk = dr.residue_route / Cplx(0, kPi);
    row.fast_path = dr.heat_route_available;
    row.fast_gap = dr.heat_route;
    row.fast_discrepancy = dr.discrepancy;
    row.depth = std::max(d.n - k, 0);
    row.tol = spec.cfg.contour_tol;
    rep.rows.push_back(row);
    if (dr.heat_route_available) {
      double scale = std::max({std::abs(dr.residue_route), std::abs(dr.heat_route), 1e-3});
      worst_route = std::max(worst_route, dr.discrepancy / scale);
    }
    if (!dr.mechanism.empty()) rep.extras["mechanisms"][std::to_string(k)] = dr.mechanism;
  }
  add_property(rep.properties, "dirac-geometry", "residue vs heat route agreement", worst_route,
               1e-6);
  return rep;
}

ExperimentReport run_matrix(const OperatorSpec& spec) {
  ExperimentReport rep;
  rep.name = spec.name;
  rep.kind = spec.kind;
  const Matrix& a = spec.matrix;

  Json clusters = Json::array();
  std::vector<EigenCluster> oracle = eigen_oracle(a, spec.cfg.cluster_tolerance);
  for (const auto& c : oracle) {
    Json jc;
    jc["eigenvalue"] = complex_json(c.center);
    jc["multiplicity"] = c.multiplicity;
    jc["projector"] = matrix_json(c.projector);
    clusters.push_back(std::move(jc));
  }
  rep.extras["clusters"] = std::move(clusters);

  double worst_idem = 0, worst_oracle = 0;
  Json projections = Json::array();
  for (const auto& cuts : spec.cut_pairs) {
    Matrix pi = sectorial_projection_matrix(a, cuts, spec.cfg);
    Json jp;
    jp["theta"] = cuts.theta;
    jp["thetaPrime"] = cuts.theta_prime;
    jp["projection"] = matrix_json(pi);
    projections.push_back(std::move(jp));

    worst_idem = std::max(worst_idem, (pi * pi - pi).cwiseAbs().maxCoeff());
    Matrix expect = Matrix::Zero(a.rows(), a.cols());
    for (const auto& c : oracle)
      if (cuts.sector_contains(c.center)) expect += c.projector;
    worst_oracle = std::max(worst_oracle, (pi - expect).cwiseAbs().maxCoeff());
  }
  rep.extras["sectorialProjections"] = std::move(projections);
  add_property(rep.properties, "matrix-kernel", "projection idempotence", worst_idem, 1e-10);
  add_property(rep.properties, "matrix-kernel", "agreement with the eigen oracle", worst_oracle,
               1e-10);
  return rep;
}

}  // namespace

int ExperimentReport::failures() const {
  int n = 0;
  for (const auto& p : properties)
    if (!p.pass) ++n;
  return n;
}

std::string ExperimentReport::to_json() const {
  Json j;
  j["engine"] = kEngineVersion;
  j["name"] = name;
  j["kind"] = kind;
  if (!spec_echo.is_null()) j["spec"] = spec_echo;
  if (!extras.is_null()) j["extras"] = extras;
  Json rows_json = Json::array();
  for (const auto& r : rows) {
    Json jr;
    jr["operator"] = r.operator_id;
    jr["theta"] = r.theta;
    jr["thetaPrime"] = r.theta_prime;
    jr["k"] = r.k;
    jr["gap"] = complex_json(r.gap);
    jr["resPk"] = complex_json(r.residue_pk);
    jr["resPiPk"] = complex_json(r.residue_pi_pk);
    jr["fastPath"] = r.fast_path;
    if (r.fast_path) {
      jr["fastGap"] = complex_json(r.fast_gap);
      jr["fastDiscrepancy"] = r.fast_discrepancy;
    }
    jr["depth"] = r.depth;
    jr["tol"] = r.tol;
    rows_json.push_back(std::move(jr));
  }
  j["asymmetry"] = std::move(rows_json);
  Json props = Json::array();
  for (const auto& p : properties) {
    Json jp;
    jp["module"] = p.module;
    jp["property"] = p.name;
    jp["measured"] = p.measured;
    jp["tolerance"] = p.tolerance;
    jp["pass"] = p.pass;
    if (p.criterion > 0) jp["criterion"] = p.criterion;
    props.push_back(std::move(jp));
  }
  j["properties"] = std::move(props);
  j["pass"] = failures() == 0;
  return j.dump(2) + "\n";
}

std::string ExperimentReport::to_csv() const {
  std::string out;
  if (!rows.empty()) {
    out = "operator,theta,thetaPrime,k,re(gap),im(gap),re(resPk),im(resPk),depth,tol\n";
    for (const auto& r : rows) {
      out += r.operator_id + "," + fmt_double(r.theta) + "," + fmt_double(r.theta_prime) + "," +
             std::to_string(r.k) + "," + fmt_double(r.gap.real()) + "," +
             fmt_double(r.gap.imag()) + "," + fmt_double(r.residue_pk.real()) + "," +
             fmt_double(r.residue_pk.imag()) + "," + std::to_string(r.depth) + "," +
             fmt_double(r.tol) + "\n";
    }
  } else {
    out = "module,property,measured,tolerance,pass\n";
    for (const auto& p : properties) {
      out += p.module + "," + p.name + "," + fmt_double(p.measured) + "," +
             fmt_double(p.tolerance) + "," + (p.pass ? "1" : "0") + "\n";
    }
  }
  return out;
}

ExperimentReport run_spec(const OperatorSpec& spec) {
  ExperimentReport rep;
  if (spec.kind == "symbolic")
    rep = run_symbolic(spec);
  else if (spec.kind == "dirac")
    rep = run_dirac(spec);
  else
    rep = run_matrix(spec);
  return rep;
}

ExperimentReport verify_report(std::uint64_t seed, const std::string& level,
                               const EngineConfig& cfg) {
  VerifyReport v = run_verify(seed, level, cfg);
  ExperimentReport rep;
  rep.name = "verify";
  rep.kind = "verify";
  rep.extras["seed"] = v.seed;
  rep.extras["level"] = v.level;
  rep.properties = v.results;
  return rep;
}

}  // namespace spa
