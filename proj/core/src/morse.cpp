#include "levelvol/morse.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace levelvol {

std::string_view to_string(Site site) { return site == Site::interior ? "interior" : "boundary"; }

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::unknown: return "unknown";
  }
  return "unknown";
}

bool NondegeneracyReport::all_pass() const {
  for (const auto* c : {&condition_a, &condition_b, &condition_c, &condition_d, &condition_e})
    if (c->status != CheckStatus::pass) return false;
  return true;
}

Signature signature(const Matrix& symmetric, double eigen_tol) {
  Signature s;
  if (symmetric.rows() == 0) {
    s.det = 1.0;
    s.min_abs = std::numeric_limits<double>::infinity();
    return s;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  s.det = ev.prod();
  s.min_abs = ev.cwiseAbs().minCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > eigen_tol) ++s.p;
    else if (ev[i] < -eigen_tol) ++s.q;
    else ++s.zero;
  }
  return s;
}

namespace {

constexpr int kMaxNewtonIterations = 100;

bool lex_less(const Point& a, const Point& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

void sort_points(std::vector<CriticalPoint>& pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.value != b.value) return a.value < b.value;
    return lex_less(a.location, b.location);
  });
}

void dedup_into(std::vector<CriticalPoint>& out, CriticalPoint cp, double radius) {
  for (auto& e : out) {
    if ((e.location - cp.location).norm() <= radius) {
      if (cp.residual < e.residual) e = std::move(cp);
      return;
    }
  }
  out.push_back(std::move(cp));
}

// Pseudo-inverse solve of a symmetric system, dropping tiny eigenvalues.
Vector symmetric_solve(const Matrix& a, const Vector& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Vector& ev = es.eigenvalues();
  const double cutoff = 1e-14 * std::max(1e-300, ev.cwiseAbs().maxCoeff());
  Vector c = es.eigenvectors().transpose() * b;
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = std::abs(ev[i]) > cutoff ? c[i] / ev[i] : 0.0;
  return es.eigenvectors() * c;
}

Box padded(const Box& b, double frac) {
  Box r = b;
  const Vector pad = frac * (b.hi - b.lo);
  r.lo -= pad;
  r.hi += pad;
  return r;
}

// Damped Newton on grad f = 0 with backtracking on |grad f|^2. Iterates
// until no further decrease (or the iteration cap) so that slowly
// converging degenerate points are driven as far as possible.
bool newton_interior(const ScalarField& f, Point& x, const Box& fence, double tol) {
  const int n = f.dimension();
  Vector g = f.gradient(x);
  double phi = 0.5 * g.squaredNorm();
  for (int it = 0; it < kMaxNewtonIterations && phi > 0.0; ++it) {
    const Matrix h = f.hessian(x);
    Vector d = symmetric_solve(h, -g);
    if (!d.allFinite() || d.squaredNorm() == 0.0) d = -(h * g);
    if (!d.allFinite() || d.squaredNorm() == 0.0) break;
    double t = 1.0;
    bool accepted = false;
    Point xn(n);
    Vector gn(n);
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      xn = x + t * d;
      gn = f.gradient(xn);
      const double phin = 0.5 * gn.squaredNorm();
      if (phin < phi * (1.0 - 1e-4 * t)) {
        accepted = true;
        phi = phin;
        break;
      }
    }
    if (!accepted) break;
    const double step = (xn - x).norm();
    x = xn;
    g = gn;
    if (!fence.contains(x)) return false;
    if (step <= 1e-15 * (1.0 + x.norm())) break;
  }
  return std::sqrt(2.0 * phi) <= tol;
}

Matrix tangent_basis(const Vector& normal) {
  const int n = static_cast<int>(normal.size());
  Eigen::HouseholderQR<Matrix> qr(normal);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return q.rightCols(n - 1);
}

struct BoundaryState {
  Point x;
  double lambda = 0.0;
};

Vector boundary_residual(const ScalarField& f, const Domain& dom, const Point& x, double lambda) {
  const int n = f.dimension();
  Vector r(n + 1);
  r.head(n) = f.gradient(x) - lambda * dom.constraint_gradient(x);
  r[n] = dom.constraint(x);
  return r;
}

bool project_to_boundary(const Domain& dom, Point& x, const Box& fence) {
  for (int it = 0; it < 60; ++it) {
    const double g = dom.constraint(x);
    const Vector gg = dom.constraint_gradient(x);
    const double gn2 = gg.squaredNorm();
    if (std::abs(g) <= 1e-14) return true;
    if (gn2 < 1e-20) return false;
    x -= (g / gn2) * gg;
    if (!fence.contains(x)) return false;
  }
  return std::abs(dom.constraint(x)) <= 1e-10;
}

bool newton_boundary(const ScalarField& f, const Domain& dom, BoundaryState& s, const Box& fence) {
  const int n = f.dimension();
  Vector r = boundary_residual(f, dom, s.x, s.lambda);
  double phi = 0.5 * r.squaredNorm();
  for (int it = 0; it < kMaxNewtonIterations && phi > 0.0; ++it) {
    const Vector gg = dom.constraint_gradient(s.x);
    Matrix j = Matrix::Zero(n + 1, n + 1);
    j.topLeftCorner(n, n) = f.hessian(s.x) - s.lambda * dom.constraint_hessian(s.x);
    j.block(0, n, n, 1) = -gg;
    j.block(n, 0, 1, n) = gg.transpose();
    Vector d = j.colPivHouseholderQr().solve(-r);
    if (!d.allFinite()) break;
    double t = 1.0;
    bool accepted = false;
    BoundaryState next;
    Vector rn;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      next.x = s.x + t * d.head(n);
      next.lambda = s.lambda + t * d[n];
      rn = boundary_residual(f, dom, next.x, next.lambda);
      const double phin = 0.5 * rn.squaredNorm();
      if (phin < phi * (1.0 - 1e-4 * t)) {
        accepted = true;
        phi = phin;
        break;
      }
    }
    if (!accepted) break;
    const double step = (next.x - s.x).norm();
    s = next;
    r = rn;
    if (!fence.contains(s.x)) return false;
    if (step <= 1e-15 * (1.0 + s.x.norm())) break;
  }
  return true;
}

}  // namespace

CriticalPointSearch find_interior_critical_points(const ScalarField& field, const Domain& domain,
                                                  int seed_grid_resolution, double tol) {
  const int n = field.dimension();
  if (domain.dimension() != n) throw InvalidArgument("find_interior_critical_points: field and domain dimensions differ");
  if (seed_grid_resolution < 1) throw InvalidArgument("find_interior_critical_points: resolution must be positive");
  if (!(tol > 0.0)) throw InvalidArgument("find_interior_critical_points: tol must be positive");
  const Box& box = domain.bounding_box();
  const Box fence = padded(box, 0.25);
  const int r = seed_grid_resolution;
  const auto nodes_per_axis = static_cast<std::size_t>(r + 1);
  std::size_t node_count = 1;
  for (int d = 0; d < n; ++d) node_count *= nodes_per_axis;
  if (node_count > 50'000'000) throw InvalidArgument("find_interior_critical_points: seed grid too large");

  auto node_point = [&](std::size_t flat) {
    Point x(n);
    for (int d = 0; d < n; ++d) {
      const auto i = flat % nodes_per_axis;
      flat /= nodes_per_axis;
      x[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * static_cast<double>(i) / r;
    }
    return x;
  };

  Matrix grads(n, static_cast<Eigen::Index>(node_count));
  for (std::size_t i = 0; i < node_count; ++i) grads.col(static_cast<Eigen::Index>(i)) = field.gradient(node_point(i));

  std::size_t cell_count = 1;
  for (int d = 0; d < n; ++d) cell_count *= static_cast<std::size_t>(r);
  const std::size_t corners = std::size_t{1} << n;

  CriticalPointSearch out;
  std::vector<CriticalPoint> found;
  Point flat_lo;
  Point flat_hi;
  std::vector<std::size_t> idx(static_cast<std::size_t>(n));
  for (std::size_t c = 0; c < cell_count; ++c) {
    std::size_t rem = c;
    std::size_t base = 0;
    std::size_t stride = 1;
    for (int d = 0; d < n; ++d) {
      idx[static_cast<std::size_t>(d)] = rem % static_cast<std::size_t>(r);
      rem /= static_cast<std::size_t>(r);
      base += stride * idx[static_cast<std::size_t>(d)];
      stride *= nodes_per_axis;
    }
    Vector mn = Vector::Constant(n, std::numeric_limits<double>::infinity());
    Vector mx = -mn;
    bool flat = true;
    double best_norm = std::numeric_limits<double>::infinity();
    std::size_t best_corner = base;
    for (std::size_t k = 0; k < corners; ++k) {
      std::size_t node = base;
      std::size_t s = 1;
      for (int d = 0; d < n; ++d) {
        if (k & (std::size_t{1} << d)) node += s;
        s *= nodes_per_axis;
      }
      const auto col = grads.col(static_cast<Eigen::Index>(node));
      mn = mn.cwiseMin(col);
      mx = mx.cwiseMax(col);
      const double nrm = col.norm();
      if (nrm > tol) flat = false;
      if (nrm < best_norm) {
        best_norm = nrm;
        best_corner = node;
      }
    }
    if (!((mn.array() <= 0.0) && (mx.array() >= 0.0)).all()) continue;

    Point lo(n);
    Point hi(n);
    for (int d = 0; d < n; ++d) {
      const double w = (box.hi[d] - box.lo[d]) / r;
      lo[d] = box.lo[d] + w * static_cast<double>(idx[static_cast<std::size_t>(d)]);
      hi[d] = lo[d] + w;
    }
    if (flat) {
      if (flat_lo.size() == 0) {
        flat_lo = lo;
        flat_hi = hi;
      } else {
        flat_lo = flat_lo.cwiseMin(lo);
        flat_hi = flat_hi.cwiseMax(hi);
      }
      continue;
    }

    Point x = 0.5 * (lo + hi);
    bool ok = newton_interior(field, x, fence, tol);
    if (!ok) {
      x = node_point(best_corner);
      ok = newton_interior(field, x, fence, tol);
    }
    if (!ok) {
      out.unknown.push_back({lo, hi, UnresolvedCell::Reason::newton_failed});
      continue;
    }
    const double g = domain.constraint(x);
    const double gn = domain.constraint_gradient(x).norm();
    const double dist = gn > 0.0 ? g / gn : g;
    if (dist > tol) continue;  // converged to a critical point outside V

    CriticalPoint cp;
    cp.location = x;
    cp.value = field.eval(x);
    cp.site = Site::interior;
    cp.residual = field.gradient(x).norm();
    cp.gradient_norm = cp.residual;
    cp.constraint_value = g;
    const Signature sig = signature(field.hessian(x), tol);
    cp.morse_p = sig.p;
    cp.morse_q = sig.q;
    cp.hessian_det = sig.det;
    cp.min_abs_eigenvalue = sig.min_abs;
    dedup_into(found, std::move(cp), 10.0 * tol);
  }
  if (flat_lo.size() != 0) out.unknown.push_back({flat_lo, flat_hi, UnresolvedCell::Reason::flat});
  sort_points(found);
  out.points = std::move(found);
  return out;
}

CriticalPointSearch find_boundary_critical_points(const ScalarField& field, const Domain& domain, int seed_count,
                                                  double tol) {
  const int n = field.dimension();
  if (domain.dimension() != n) throw InvalidArgument("find_boundary_critical_points: field and domain dimensions differ");
  if (seed_count < 1) throw InvalidArgument("find_boundary_critical_points: seed_count must be positive");
  if (!(tol > 0.0)) throw InvalidArgument("find_boundary_critical_points: tol must be positive");
  CriticalPointSearch out;
  if (!domain.smooth_boundary() || n < 2) return out;
  const Box& box = domain.bounding_box();
  const Box fence = padded(box, 0.25);
  std::vector<CriticalPoint> found;
  for (int i = 0; i < seed_count; ++i) {
    Point x = detail::halton_point(static_cast<std::size_t>(i), box);
    if (!project_to_boundary(domain, x, fence)) continue;
    const Vector gg = domain.constraint_gradient(x);
    if (gg.norm() < tol) continue;
    BoundaryState s{x, field.gradient(x).dot(gg) / gg.squaredNorm()};
    if (!newton_boundary(field, domain, s, fence)) continue;
    const Vector r = boundary_residual(field, domain, s.x, s.lambda);
    const double g = r[n];
    const double res = r.head(n).norm();
    if (!(res <= tol) || !(std::abs(g) <= tol)) continue;
    const Vector normal = domain.constraint_gradient(s.x);
    if (normal.norm() < tol) continue;  // irregular boundary point

    const Matrix b = tangent_basis(normal);
    const Matrix hr = b.transpose() * (field.hessian(s.x) - s.lambda * domain.constraint_hessian(s.x)) * b;
    const Signature sig = signature(0.5 * (hr + hr.transpose()), tol);
    CriticalPoint cp;
    cp.location = s.x;
    cp.value = field.eval(s.x);
    cp.site = Site::boundary;
    cp.morse_p = sig.p;
    cp.morse_q = sig.q;
    cp.hessian_det = sig.det;
    cp.min_abs_eigenvalue = sig.min_abs;
    cp.residual = res;
    cp.multiplier = s.lambda;
    cp.gradient_norm = field.gradient(s.x).norm();
    cp.constraint_value = g;
    dedup_into(found, std::move(cp), 10.0 * tol);
  }
  sort_points(found);
  out.points = std::move(found);
  return out;
}

namespace {

// Smallest value gap among a sorted-by-value list, with the pair realizing it.
double min_gap(const std::vector<const CriticalPoint*>& pts, std::vector<Point>& witnesses, double tol) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double gap = std::abs(pts[i]->value - pts[j]->value);
      best = std::min(best, gap);
      if (gap <= tol) {
        witnesses.push_back(pts[i]->location);
        witnesses.push_back(pts[j]->location);
      }
    }
  return best;
}

}  // namespace

NondegeneracyReport check_nondegeneracy(const CriticalPointSearch& interior, const CriticalPointSearch& boundary,
                                        const Domain& domain, double tol) {
  NondegeneracyReport rep;
  rep.interior = interior.points;
  rep.boundary = boundary.points;

  // a
  for (const auto& cp : interior.points)
    if (cp.degenerate(tol)) rep.condition_a.witnesses.push_back(cp.location);
  for (const auto& cell : interior.unknown)
    if (cell.reason == UnresolvedCell::Reason::flat) rep.condition_a.witnesses.push_back(0.5 * (cell.lo + cell.hi));
  if (!rep.condition_a.witnesses.empty()) {
    rep.condition_a.status = CheckStatus::fail;
    const bool flat = std::any_of(interior.unknown.begin(), interior.unknown.end(),
                                  [](const UnresolvedCell& c) { return c.reason == UnresolvedCell::Reason::flat; });
    rep.condition_a.note = flat ? "gradient vanishes on a whole region" : "zero Hessian eigenvalue";
  } else if (!interior.unknown.empty()) {
    rep.condition_a.status = CheckStatus::unknown;
    rep.condition_a.note = std::to_string(interior.unknown.size()) + " seed cell(s) did not converge";
  }

  // b
  for (const auto& cp : interior.points) {
    const double gn = domain.constraint_gradient(cp.location).norm();
    const double dist = gn > 0.0 ? std::abs(cp.constraint_value) / gn : std::abs(cp.constraint_value);
    if (dist <= tol) rep.condition_b.witnesses.push_back(cp.location);
  }
  if (!rep.condition_b.witnesses.empty()) {
    rep.condition_b.status = CheckStatus::fail;
    rep.condition_b.note = "critical point of f on the boundary";
  }

  // c
  const bool smooth = domain.smooth_boundary();
  if (!smooth) {
    rep.condition_c.status = CheckStatus::unknown;
    rep.condition_c.note = "boundary has corners; not checked";
  } else {
    for (const auto& cp : boundary.points)
      if (cp.degenerate(tol)) rep.condition_c.witnesses.push_back(cp.location);
    if (!rep.condition_c.witnesses.empty()) {
      rep.condition_c.status = CheckStatus::fail;
      rep.condition_c.note = "degenerate critical point of f on the boundary";
    }
  }

  // d, e
  std::vector<const CriticalPoint*> in_pts;
  for (const auto& cp : interior.points) in_pts.push_back(&cp);
  const double gap_d = min_gap(in_pts, rep.condition_d.witnesses, tol);
  if (!rep.condition_d.witnesses.empty()) {
    rep.condition_d.status = CheckStatus::fail;
    rep.condition_d.note = "two interior critical points share a value";
  }
  std::vector<const CriticalPoint*> all_pts = in_pts;
  for (const auto& cp : boundary.points) all_pts.push_back(&cp);
  std::vector<Point> e_witnesses;
  const double gap_e = min_gap(all_pts, e_witnesses, tol);
  rep.fine_min_gap = std::min(gap_d, gap_e);
  if (!smooth) {
    rep.condition_e.status = CheckStatus::unknown;
    rep.condition_e.note = "boundary has corners; not checked";
  } else if (!e_witnesses.empty()) {
    rep.condition_e.status = CheckStatus::fail;
    rep.condition_e.witnesses = std::move(e_witnesses);
    rep.condition_e.note = "two critical points share a value";
  }
  return rep;
}

NondegeneracyReport check_nondegeneracy(const ScalarField& field, const Domain& domain, const MorseOptions& options) {
  const auto interior = find_interior_critical_points(field, domain, options.seed_grid_resolution, options.tol);
  const auto boundary = find_boundary_critical_points(field, domain, options.boundary_seed_count, options.tol);
  return check_nondegeneracy(interior, boundary, domain, options.eigen_tol > 0.0 ? options.eigen_tol : options.tol);
}

}  // namespace levelvol
