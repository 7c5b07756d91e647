#include "core/specfile.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

#include "core/errors.hpp"

namespace spa {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

[[noreturn]] void schema_fail(const std::string& what) { fail(ErrorCode::SchemaError, what); }

double torus_volume(int n) {
  double v = 1;
  for (int i = 0; i < n; ++i) v *= 2 * kPi;
  return v;
}

Cplx parse_complex(const Json& j, const char* where) {
  if (j.is_number()) return Cplx(j.get<double>(), 0.0);
  if (j.is_object() && j.contains("re"))
    return Cplx(j.at("re").get<double>(), j.value("im", 0.0));
  schema_fail(std::string(where) + ": complex numbers are numbers or {re, im} objects");
}

Matrix parse_matrix(const Json& j, int rows, int cols, const char* where) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    schema_fail(std::string(where) + ": expected a " + std::to_string(rows) + "-row matrix");
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const Json& row = j.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      schema_fail(std::string(where) + ": ragged matrix row");
    for (int c = 0; c < cols; ++c) m(i, c) = parse_complex(row.at(c), where);
  }
  return m;
}

Freq parse_frequency(const Json& j, int n, const char* where) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    schema_fail(std::string(where) + ": xFrequency needs " + std::to_string(n) + " integers");
  Freq f;
  for (int i = 0; i < n; ++i) f.k[i] = j.at(i).get<int>();
  return f;
}

SymbolExpansion parse_symbol(const Json& j, int n, int r) {
  if (!j.contains("order") || !j.contains("components"))
    schema_fail("symbol needs order and components");
  SymbolExpansion s;
  s.order = j.at("order").get<int>();
  s.torus_dim = n;
  s.fiber_dim = r;
  s.exact_beyond = true;  // a finite list of components is the operator

  const Json& comps = j.at("components");
  if (!comps.is_array() || comps.empty()) schema_fail("symbol.components must be non-empty");

  // Degrees must descend by one from the order; missing levels are zero.
  std::map<int, HomogeneousComponent> by_degree;
  int lowest = s.order;
  for (const Json& jc : comps) {
    int degree = jc.at("degree").get<int>();
    if (degree > s.order) schema_fail("component degree exceeds the symbol order");
    lowest = std::min(lowest, degree);
    HomogeneousComponent c;
    c.degree = degree;
    c.fiber_dim = r;
    c.torus_dim = n;
    std::map<Freq, std::vector<std::pair<Cplx, XiExprPtr>>> sums;
    for (const Json& jt : jc.at("terms")) {
      Freq f = parse_frequency(jt.at("xFrequency"), n, "term");
      MIdx mono{0, 0, 0, 0};
      const Json& ex = jt.at("xiExponents");
      if (!ex.is_array() || static_cast<int>(ex.size()) != n)
        schema_fail("xiExponents needs one entry per torus direction");
      int mono_total = 0;
      for (int i = 0; i < n; ++i) {
        mono[i] = ex.at(i).get<int>();
        if (mono[i] < 0) schema_fail("xiExponents must be non-negative");
        mono_total += mono[i];
      }
      int w = jt.value("xiNormPower", 0);
      if (mono_total + w != degree)
        schema_fail("term homogeneity |exponents| + xiNormPower must equal the degree");
      Matrix coeff = parse_matrix(jt.at("coefficient"), r, r, "term coefficient");
      sums[f].emplace_back(Cplx(1, 0), make_term(coeff, mono, w));
    }
    for (auto& [f, terms] : sums) c.modes[f] = make_sum(std::move(terms), r, r);
    auto [it, fresh] = by_degree.emplace(degree, std::move(c));
    if (!fresh) schema_fail("duplicate component degree");
  }
  for (int d = s.order; d >= lowest; --d) {
    auto it = by_degree.find(d);
    if (it != by_degree.end()) {
      s.components.push_back(std::move(it->second));
    } else {
      HomogeneousComponent zero;
      zero.degree = d;
      zero.fiber_dim = r;
      zero.torus_dim = n;
      s.components.push_back(std::move(zero));
    }
  }
  if (s.components[0].modes.empty()) schema_fail("leading symbol component is zero");
  return s;
}

CliffordData parse_dirac(const Json& j) {
  int n = j.at("n").get<int>();
  if (n != 2 && n != 4) schema_fail("dirac.n must be 2 or 4");
  int rank = j.value("twistRank", 1);
  if (rank < 1) schema_fail("dirac.twistRank must be positive");
  double volume = j.value("volume", torus_volume(n));
  std::vector<std::map<Freq, Matrix>> conn(n);
  if (j.contains("connection")) {
    const Json& jc = j.at("connection");
    if (!jc.is_array() || static_cast<int>(jc.size()) != n)
      schema_fail("dirac.connection needs one field per direction");
    for (int i = 0; i < n; ++i) {
      for (const Json& jt : jc.at(i)) {
        Freq f = parse_frequency(jt.at("xFrequency"), n, "connection");
        conn[i][f] = parse_matrix(jt.at("coefficient"), rank, rank, "connection coefficient");
      }
    }
  }
  return make_clifford(n, rank, volume, std::move(conn));
}

}  // namespace

OperatorSpec parse_spec(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    schema_fail(std::string("invalid JSON: ") + e.what());
  }

  OperatorSpec spec;
  spec.name = j.value("name", "operator");
  spec.kind = j.value("kind", "symbolic");
  if (spec.kind != "symbolic" && spec.kind != "dirac" && spec.kind != "matrix")
    schema_fail("kind must be symbolic, dirac, or matrix");

  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    spec.cfg.cluster_tolerance = t.value("clusterTolerance", spec.cfg.cluster_tolerance);
    spec.cfg.contour_tol = t.value("contourTol", spec.cfg.contour_tol);
    spec.cfg.parity_tol = t.value("parityTol", spec.cfg.parity_tol);
    spec.cfg.deriv_tol = t.value("derivTol", spec.cfg.deriv_tol);
  }
  spec.depth = j.value("depth", 4);
  if (spec.depth < 0) schema_fail("depth must be non-negative");
  spec.seed = j.value("seed", 0ULL);
  int nodes = j.value("contourNodes", 0);
  if (nodes < 0) schema_fail("contourNodes must be non-negative");
  if (nodes > 0) {
    spec.cfg.symbol_contour_override = nodes;
    spec.cfg.matrix_contour_nodes = nodes;
  }

  if (j.contains("cutPairs")) {
    for (const Json& jc : j.at("cutPairs")) {
      double theta = jc.at("theta").get<double>();
      double theta_prime = jc.at("thetaPrime").get<double>();
      if (theta < 0 || theta_prime >= 4 * kPi)
        schema_fail("cut angles must lie in [0, 4 pi)");
      spec.cut_pairs.emplace_back(theta, theta_prime);
    }
  }
  if (j.contains("kList"))
    for (const Json& jk : j.at("kList")) spec.k_list.push_back(jk.get<int>());

  if (spec.kind == "symbolic") {
    int n = j.at("torusDim").get<int>();
    if (n < 2 || n > 4) schema_fail("torusDim must be 2, 3, or 4");
    int r = j.value("fiberDim", 1);
    if (r < 1) schema_fail("fiberDim must be positive");
    spec.volume = j.value("volume", torus_volume(n));
    if (!j.contains("symbol")) schema_fail("symbolic specs need a symbol block");
    spec.symbol = parse_symbol(j.at("symbol"), n, r);
  } else if (spec.kind == "dirac") {
    if (!j.contains("dirac")) schema_fail("dirac specs need a dirac block");
    spec.dirac = parse_dirac(j.at("dirac"));
    spec.has_dirac = true;
    spec.volume = spec.dirac.volume;
  } else {
    if (!j.contains("matrix")) schema_fail("matrix specs need a matrix block");
    const Json& jm = j.at("matrix");
    int dim = jm.at("dim").get<int>();
    if (dim < 1) schema_fail("matrix.dim must be positive");
    const Json& entries = jm.at("entries");
    if (!entries.is_array() || static_cast<int>(entries.size()) != dim * dim)
      schema_fail("matrix.entries must hold dim*dim row-major values");
    spec.matrix = Matrix(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int c = 0; c < dim; ++c)
        spec.matrix(i, c) = parse_complex(entries.at(i * dim + c), "matrix entry");
  }
  return spec;
}

OperatorSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) schema_fail("cannot open spec file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_spec(text);
}

}  // namespace spa
