#include "core/matrix_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "core/compensated.hpp"
#include "core/errors.hpp"
#include "core/quadrature.hpp"

namespace spa {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

double wrap_2pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a;
}

// Distance from z to the half-line {rho e^{i theta} : rho >= 0}.
double half_line_distance(Cplx z, double theta) {
  Cplx dir(std::cos(theta), std::sin(theta));
  double proj = z.real() * dir.real() + z.imag() * dir.imag();
  if (proj <= 0) return std::abs(z);
  return std::abs(z - proj * dir);
}

struct ClusterIndex {
  std::vector<std::vector<int>> groups;  // indices into the point list
};

// Union-find clustering with the given glue distance; groups are sorted by
// (re, im) of their centroid for deterministic downstream iteration.
ClusterIndex cluster_points(const std::vector<Cplx>& pts, double glue) {
  int n = static_cast<int>(pts.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(pts[i] - pts[j]) <= glue) parent[find(i)] = find(j);
  std::vector<std::vector<int>> groups;
  std::vector<int> root_of(n, -1);
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    if (root_of[r] < 0) {
      root_of[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[root_of[r]].push_back(i);
  }
  auto centroid = [&](const std::vector<int>& g) {
    Cplx c = 0;
    for (int i : g) c += pts[i];
    return c / static_cast<double>(g.size());
  };
  std::sort(groups.begin(), groups.end(), [&](const auto& a, const auto& b) {
    Cplx ca = centroid(a), cb = centroid(b);
    if (ca.real() != cb.real()) return ca.real() < cb.real();
    return ca.imag() < cb.imag();
  });
  return {groups};
}

// Swap the diagonal entries at positions k, k+1 of the Schur factor by a
// unitary similarity, ztrexc style.
void schur_swap(Matrix& t, Matrix& u, int k) {
  Cplx a = t(k, k), d = t(k + 1, k + 1), b = t(k, k + 1);
  Cplx v0 = b, v1 = d - a;
  double nrm = std::sqrt(std::norm(v0) + std::norm(v1));
  if (nrm == 0.0) return;  // equal eigenvalues, nothing to move
  Cplx c0 = v0 / nrm, c1 = v1 / nrm;
  Eigen::Matrix2cd q;
  q << c0, -std::conj(c1), c1, std::conj(c0);
  int n = static_cast<int>(t.rows());
  t.block(k, 0, 2, n) = q.adjoint() * t.block(k, 0, 2, n);
  t.block(0, k, n, 2) = t.block(0, k, n, 2) * q;
  u.block(0, k, n, 2) = u.block(0, k, n, 2) * q;
  t(k + 1, k) = 0.0;
}

}  // namespace

CutPair::CutPair(double t, double tp) : theta(t), theta_prime(tp) {
  if (!(theta >= 0.0 && theta < kTwoPi))
    fail(ErrorCode::SchemaError, "cut angle theta must lie in [0, 2pi)");
  if (!(theta_prime > theta && theta_prime <= theta + kTwoPi))
    fail(ErrorCode::SchemaError, "theta_prime must lie in (theta, theta + 2pi]");
}

bool CutPair::sector_contains(Cplx z) const {
  if (z == Cplx(0, 0)) return false;
  double a = wrap_2pi(std::arg(z));
  return (a > theta && a < theta_prime) ||
         (a + kTwoPi > theta && a + kTwoPi < theta_prime);
}

double CutPair::ray_distance(Cplx z) const {
  return std::min(half_line_distance(z, theta), half_line_distance(z, theta_prime));
}

CutPair CutPair::complement() const {
  return CutPair(wrap_2pi(theta_prime), wrap_2pi(theta_prime) + (kTwoPi - (theta_prime - theta)));
}

ContourSpec ContourSpec::circle(Cplx center, double radius, int n) {
  ContourSpec c;
  c.nodes.resize(n);
  c.weights.resize(n);
  for (int t = 0; t < n; ++t) {
    double phi = kTwoPi * t / n;
    Cplx e(std::cos(phi), std::sin(phi));
    c.nodes[t] = center + radius * e;
    c.weights[t] = Cplx(0, 1) * radius * e * (kTwoPi / n);
  }
  c.direct_oriented = true;
  return c;
}

ContourSpec ContourSpec::sector_stadium(const CutPair& cuts, double r, double R, int total) {
  ContourSpec c;
  c.direct_oriented = false;  // paper orientation encircles the sector clockwise
  int per = std::max(8, total / 4);
  Quad1d gl = gauss_legendre(per);
  auto push_segment = [&](double angle, double rho0, double rho1) {
    Cplx dir(std::cos(angle), std::sin(angle));
    for (int i = 0; i < per; ++i) {
      double s = 0.5 * (gl.nodes[i] + 1.0);
      double rho = rho0 + (rho1 - rho0) * s;
      c.nodes.push_back(rho * dir);
      c.weights.push_back(dir * (rho1 - rho0) * 0.5 * gl.weights[i]);
    }
  };
  auto push_arc = [&](double rho, double a0, double a1) {
    for (int i = 0; i < per; ++i) {
      double s = 0.5 * (gl.nodes[i] + 1.0);
      double t = a0 + (a1 - a0) * s;
      Cplx e(std::cos(t), std::sin(t));
      c.nodes.push_back(rho * e);
      c.weights.push_back(Cplx(0, 1) * rho * e * (a1 - a0) * 0.5 * gl.weights[i]);
    }
  };
  push_segment(cuts.theta, R, r);
  push_arc(r, cuts.theta, cuts.theta_prime);
  push_segment(cuts.theta_prime, r, R);
  push_arc(R, cuts.theta_prime, cuts.theta);
  return c;
}

int ContourSpec::winding_number(Cplx z) const {
  KahanSum total;
  int n = static_cast<int>(nodes.size());
  for (int t = 0; t < n; ++t) {
    Cplx a = nodes[t] - z, b = nodes[(t + 1) % n] - z;
    total.add(std::arg(b / a));
  }
  return static_cast<int>(std::lround(total.value() / kTwoPi));
}

double ContourSpec::min_distance(Cplx z) const {
  double d = std::numeric_limits<double>::infinity();
  for (const Cplx& node : nodes) d = std::min(d, std::abs(node - z));
  return d;
}

std::vector<Cplx> eigenvalues_of(const Matrix& a) {
  Eigen::ComplexSchur<Matrix> schur(a, /*computeU=*/false);
  std::vector<Cplx> out(a.rows());
  for (int i = 0; i < a.rows(); ++i) out[i] = schur.matrixT()(i, i);
  return out;
}

std::vector<EigenCluster> eigen_oracle(const Matrix& a, double cluster_tol) {
  const int n = static_cast<int>(a.rows());
  Eigen::ComplexSchur<Matrix> schur(a, /*computeU=*/true);
  Matrix t0 = schur.matrixT();
  Matrix u0 = schur.matrixU();

  std::vector<Cplx> eigs(n);
  for (int i = 0; i < n; ++i) eigs[i] = t0(i, i);

  ClusterIndex ci = cluster_points(eigs, cluster_tol);

  // Clustering glues pairs within cluster_tol, so distinct groups are already
  // separated by more than it; refuse marginal separations.
  for (size_t p = 0; p < ci.groups.size(); ++p)
    for (size_t q = p + 1; q < ci.groups.size(); ++q)
      for (int i : ci.groups[p])
        for (int j : ci.groups[q])
          if (std::abs(eigs[i] - eigs[j]) <= 2.0 * cluster_tol)
            fail(ErrorCode::ClusterAmbiguity,
                 "eigenvalue clusters separated by less than twice the cluster tolerance");

  std::vector<EigenCluster> out;
  for (const auto& group : ci.groups) {
    Matrix t = t0;
    Matrix u = u0;
    // Track positions through the swaps.
    std::vector<int> pos(n);
    std::iota(pos.begin(), pos.end(), 0);
    std::vector<char> member(n, 0);
    for (int g : group) member[g] = 1;

    int target = 0;
    for (int orig = 0; orig < n; ++orig) {
      if (!member[orig]) continue;
      int cur = -1;
      for (int i = 0; i < n; ++i)
        if (pos[i] == orig) { cur = i; break; }
      for (int k = cur; k > target; --k) {
        schur_swap(t, u, k - 1);
        std::swap(pos[k - 1], pos[k]);
      }
      ++target;
    }
    int s = target;

    EigenCluster cl;
    cl.multiplicity = s;
    Cplx mean = 0;
    for (int g : group) mean += eigs[g];
    mean /= static_cast<double>(s);
    cl.center = mean;
    for (int g : group) {
      cl.eigenvalues.push_back(eigs[g]);
      cl.radius = std::max(cl.radius, std::abs(eigs[g] - mean));
    }

    if (s == n) {
      cl.projector = Matrix::Identity(n, n);
    } else {
      // T = [[T11, T12], [0, T22]]: the spectral projector for the leading
      // block is [[I, X], [0, 0]] with T11 X - X T22 = T12.
      Matrix t11 = t.topLeftCorner(s, s);
      Matrix t12 = t.topRightCorner(s, n - s);
      Matrix t22 = t.bottomRightCorner(n - s, n - s);
      Matrix x = Matrix::Zero(s, n - s);
      for (int j = 0; j < n - s; ++j) {
        Eigen::VectorXcd rhs = t12.col(j);
        for (int i = 0; i < j; ++i) rhs += x.col(i) * t22(i, j);
        Matrix lhs = t11 - t22(j, j) * Matrix::Identity(s, s);
        x.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
      }
      Matrix p = Matrix::Zero(n, n);
      p.topLeftCorner(s, s) = Matrix::Identity(s, s);
      p.topRightCorner(s, n - s) = x;
      cl.projector = u * p * u.adjoint();
    }
    out.push_back(std::move(cl));
  }
  return out;
}

Matrix riesz_projection(const Matrix& a, const ContourSpec& gamma) {
  const int n = static_cast<int>(a.rows());
  std::vector<Cplx> eigs = eigenvalues_of(a);
  if (gamma.clearance > 0)
    for (const Cplx& ev : eigs)
      if (gamma.min_distance(ev) < gamma.clearance)
        fail(ErrorCode::PoleOnContour, "eigenvalue within clearance of the contour");

  KahanMatrixSum acc(n, n);
  Matrix id = Matrix::Identity(n, n);
  for (size_t t = 0; t < gamma.nodes.size(); ++t) {
    Matrix res = (a - gamma.nodes[t] * id).partialPivLu().solve(id);
    acc.add(gamma.weights[t] * res);
  }
  double sign = gamma.direct_oriented ? 1.0 : -1.0;
  return sign * (Cplx(0, 0.5) / kPi) * acc.value();
}

Matrix sectorial_projection_via(const Matrix& a, const ContourSpec& gamma) {
  const int n = static_cast<int>(a.rows());
  KahanMatrixSum acc(n, n);
  Matrix id = Matrix::Identity(n, n);
  for (size_t t = 0; t < gamma.nodes.size(); ++t) {
    Cplx lam = gamma.nodes[t];
    Matrix res = (a - lam * id).partialPivLu().solve(id);
    acc.add(gamma.weights[t] * ((a * res) / lam));
  }
  // (1/2 i pi) * integral, paper orientation.
  return (Cplx(0, -0.5) / kPi) * acc.value();
}

namespace {

struct NonzeroClusters {
  std::vector<std::vector<Cplx>> groups;  // member eigenvalues
  std::vector<Cplx> centers;
  std::vector<double> radii;
};

NonzeroClusters cluster_nonzero(const std::vector<Cplx>& all, double cluster_tol) {
  std::vector<Cplx> nz;
  for (const Cplx& ev : all)
    if (std::abs(ev) > cluster_tol) nz.push_back(ev);
  double scale = 0;
  for (const Cplx& ev : nz) scale = std::max(scale, std::abs(ev));
  double glue = std::max(cluster_tol, 0.05 * scale);
  ClusterIndex ci = cluster_points(nz, glue);
  NonzeroClusters out;
  for (const auto& g : ci.groups) {
    std::vector<Cplx> members;
    Cplx c = 0;
    for (int i : g) {
      members.push_back(nz[i]);
      c += nz[i];
    }
    c /= static_cast<double>(g.size());
    double r = 0;
    for (const Cplx& m : members) r = std::max(r, std::abs(m - c));
    out.groups.push_back(std::move(members));
    out.centers.push_back(c);
    out.radii.push_back(r);
  }
  return out;
}

// Split one group by a predicate, re-clustering until every subgroup is pure.
std::vector<std::vector<Cplx>> split_by(const std::vector<Cplx>& members,
                                        const std::function<bool(Cplx)>& pred, double floor_glue) {
  bool any = false, all = true;
  for (const Cplx& m : members) {
    bool p = pred(m);
    any = any || p;
    all = all && p;
  }
  if (!any || all) return {members};
  // Mixed: re-cluster with shrinking glue until membership is uniform.
  double scale = 0;
  for (const Cplx& m : members) scale = std::max(scale, std::abs(m));
  double glue = 0.025 * scale;
  while (glue >= floor_glue) {
    ClusterIndex ci = cluster_points(members, glue);
    bool ok = true;
    std::vector<std::vector<Cplx>> parts;
    for (const auto& g : ci.groups) {
      bool a = false, b = false;
      std::vector<Cplx> part;
      for (int i : g) {
        part.push_back(members[i]);
        (pred(members[i]) ? a : b) = true;
      }
      if (a && b) ok = false;
      parts.push_back(std::move(part));
    }
    if (ok && parts.size() > 1) return parts;
    glue *= 0.5;
  }
  fail(ErrorCode::PoleOnContour, "cannot separate eigenvalues across the sector boundary");
}

// Direct-oriented circle around one cluster, radius certified against the
// other poles (the obstacle list includes 0 and, for powers, the cut ray).
ContourSpec cluster_contour(Cplx center, double radius_hull, const std::vector<Cplx>& obstacles,
                            double ray_theta, bool use_ray, int nodes) {
  double d_ext = std::numeric_limits<double>::infinity();
  for (const Cplx& ob : obstacles) d_ext = std::min(d_ext, std::abs(ob - center));
  if (use_ray) d_ext = std::min(d_ext, half_line_distance(center, ray_theta));
  if (!(d_ext > radius_hull))
    fail(ErrorCode::PoleOnContour, "no certified annulus around eigenvalue cluster");
  double radius = 0.5 * (radius_hull + d_ext);
  ContourSpec c = ContourSpec::circle(center, radius, nodes);
  c.clearance = 0.5 * (d_ext - radius_hull);
  return c;
}

}  // namespace

Matrix sectorial_projection_matrix(const Matrix& a, const CutPair& cuts, const EngineConfig& cfg) {
  const int n = static_cast<int>(a.rows());
  std::vector<Cplx> eigs = eigenvalues_of(a);

  double scale = 0;
  for (const Cplx& ev : eigs) scale = std::max(scale, std::abs(ev));
  double min_nz = std::numeric_limits<double>::infinity();
  for (const Cplx& ev : eigs) {
    double m = std::abs(ev);
    if (m > cfg.cluster_tolerance) min_nz = std::min(min_nz, m);
  }
  if (std::isfinite(min_nz) && min_nz <= 10.0 * cfg.cluster_tolerance)
    fail(ErrorCode::ZeroSeparationFailure,
         "no inner radius isolates 0 from the nonzero spectrum");

  double ray_clear = std::max(1e-10, 1e-7 * scale);
  for (const Cplx& ev : eigs)
    if (std::abs(ev) > cfg.cluster_tolerance && cuts.ray_distance(ev) < ray_clear)
      fail(ErrorCode::PoleOnContour, "nonzero eigenvalue on a cut ray");

  NonzeroClusters cl = cluster_nonzero(eigs, cfg.cluster_tolerance);

  // Obstacles per cluster: everything not in the cluster, plus the origin.
  Matrix acc = Matrix::Zero(n, n);
  Matrix id = Matrix::Identity(n, n);
  for (size_t c = 0; c < cl.groups.size(); ++c) {
    auto in_sector = [&](Cplx z) { return cuts.sector_contains(z); };
    std::vector<std::vector<Cplx>> parts =
        split_by(cl.groups[c], in_sector, 10.0 * cfg.cluster_tolerance);
    for (const auto& part : parts) {
      if (!cuts.sector_contains(part.front())) continue;
      Cplx center = 0;
      for (const Cplx& m : part) center += m;
      center /= static_cast<double>(part.size());
      double rh = 0;
      for (const Cplx& m : part) rh = std::max(rh, std::abs(m - center));
      std::vector<Cplx> obstacles{Cplx(0, 0)};
      for (const Cplx& ev : eigs) {
        bool mine = false;
        for (const Cplx& m : part)
          if (std::abs(ev - m) < 1e-14 * std::max(1.0, scale)) mine = true;
        if (!mine) obstacles.push_back(ev);
      }
      ContourSpec circ =
          cluster_contour(center, rh, obstacles, 0.0, false, cfg.matrix_contour_nodes);
      KahanMatrixSum sum(n, n);
      for (size_t t = 0; t < circ.nodes.size(); ++t) {
        Cplx lam = circ.nodes[t];
        Matrix res = (a - lam * id).partialPivLu().solve(id);
        sum.add(circ.weights[t] * ((a * res) / lam));
      }
      acc += (Cplx(0, 0.5) / kPi) * sum.value();  // (-1/2 i pi) * direct integral
    }
  }
  return acc;
}

double arg_on_branch(Cplx z, double theta) {
  double a = std::arg(z);
  double delta = wrap_2pi(theta - a);
  if (delta == 0.0) fail(ErrorCode::BranchViolation, "argument lies on the cut ray");
  return theta - delta;
}

Cplx power_on_branch(Cplx z, Cplx s, double theta) {
  if (z == Cplx(0, 0)) fail(ErrorCode::BranchViolation, "0^s is undefined on any branch");
  double arg = arg_on_branch(z, theta);
  return std::exp(s * Cplx(std::log(std::abs(z)), arg));
}

Matrix matrix_complex_power(const Matrix& a, Cplx s, double theta, const EngineConfig& cfg) {
  const int n = static_cast<int>(a.rows());
  std::vector<Cplx> eigs = eigenvalues_of(a);
  double scale = 0;
  for (const Cplx& ev : eigs) scale = std::max(scale, std::abs(ev));
  double ray_clear = std::max(1e-10, 1e-7 * scale);
  for (const Cplx& ev : eigs)
    if (std::abs(ev) > cfg.cluster_tolerance && half_line_distance(ev, theta) < ray_clear)
      fail(ErrorCode::BranchViolation, "eigenvalue on the spectral cut ray");

  NonzeroClusters cl = cluster_nonzero(eigs, cfg.cluster_tolerance);

  Matrix acc = Matrix::Zero(n, n);
  Matrix id = Matrix::Identity(n, n);
  for (size_t c = 0; c < cl.groups.size(); ++c) {
    std::vector<Cplx> obstacles{Cplx(0, 0)};
    for (const Cplx& ev : eigs) {
      bool mine = false;
      for (const Cplx& m : cl.groups[c])
        if (std::abs(ev - m) < 1e-14 * std::max(1.0, scale)) mine = true;
      if (!mine) obstacles.push_back(ev);
    }
    ContourSpec circ = cluster_contour(cl.centers[c], cl.radii[c], obstacles, theta,
                                       /*use_ray=*/true, cfg.matrix_contour_nodes);
    KahanMatrixSum sum(n, n);
    for (size_t t = 0; t < circ.nodes.size(); ++t) {
      Cplx lam = circ.nodes[t];
      Matrix res = (a - lam * id).partialPivLu().solve(id);
      sum.add(circ.weights[t] * power_on_branch(lam, s, theta) * res);
    }
    acc += (Cplx(0, 0.5) / kPi) * sum.value();  // (-1/2 i pi) * direct integral
  }
  return acc;
}

}  // namespace spa
