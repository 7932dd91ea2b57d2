#pragma once

#include "levelvol/domain.hpp"
#include "levelvol/field.hpp"

#include <string_view>
#include <vector>

namespace levelvol {

enum class Site { interior, boundary };

std::string_view to_string(Site site);

struct CriticalPoint {
  Point location;
  double value = 0.0;
  int morse_p = 0;  // positive eigenvalues
  int morse_q = 0;  // negative eigenvalues
  Site site = Site::interior;
  double hessian_det = 0.0;
  double min_abs_eigenvalue = 0.0;
  /// |grad f| (interior) or |grad f - lambda grad g| (boundary).
  double residual = 0.0;
  /// Lagrange multiplier (boundary points only).
  double multiplier = 0.0;
  /// |grad f| at the location; zero up to residual for interior points.
  double gradient_norm = 0.0;
  /// Signed value of the domain constraint g at the location.
  double constraint_value = 0.0;

  bool degenerate(double tol) const { return !(min_abs_eigenvalue > tol); }
};

/// Region the interior search could not resolve.
struct UnresolvedCell {
  Point lo;
  Point hi;
  enum class Reason { newton_failed, flat } reason = Reason::newton_failed;
};

struct CriticalPointSearch {
  std::vector<CriticalPoint> points;
  std::vector<UnresolvedCell> unknown;
};

/// Newton on grad f = 0 from every cell of a uniform seed grid over the
/// domain's bounding box in which all gradient components change sign.
/// Points in V (or within tol of its boundary) are kept, deduplicated within
/// 10 * tol, and sorted by value, then lexicographically by location.
CriticalPointSearch find_interior_critical_points(const ScalarField& field, const Domain& domain,
                                                  int seed_grid_resolution, double tol = 1e-10);

/// Newton on (grad f - lambda grad g, g) = 0 from `seed_count` quasi-random
/// points projected onto the zero set of g. Returns nothing for non-smooth
/// domains. Candidates with |grad g| < tol are rejected.
CriticalPointSearch find_boundary_critical_points(const ScalarField& field, const Domain& domain, int seed_count,
                                                  double tol = 1e-10);

enum class CheckStatus { pass, fail, unknown };

std::string_view to_string(CheckStatus status);

struct ConditionResult {
  CheckStatus status = CheckStatus::pass;
  std::vector<Point> witnesses;
  std::string note;
};

struct NondegeneracyReport {
  ConditionResult condition_a;  // interior critical points non-degenerate
  ConditionResult condition_b;  // no critical point of f on the boundary
  ConditionResult condition_c;  // boundary critical points non-degenerate
  ConditionResult condition_d;  // distinct interior critical values
  ConditionResult condition_e;  // distinct values over interior and boundary points
  /// Smallest |f(x) - f(y)| over distinct critical points (interior and
  /// boundary); +infinity with fewer than two points.
  double fine_min_gap = 0.0;
  std::vector<CriticalPoint> interior;
  std::vector<CriticalPoint> boundary;

  bool all_pass() const;
};

struct MorseOptions {
  int seed_grid_resolution = 64;
  int boundary_seed_count = 256;
  double tol = 1e-10;
  /// Eigenvalues with magnitude <= this count as zero. Defaults to tol.
  double eigen_tol = 0.0;
};

/// Runs both searches and audits the five conditions.
NondegeneracyReport check_nondegeneracy(const ScalarField& field, const Domain& domain, const MorseOptions& options = {});

/// Audits given search results (no searching).
NondegeneracyReport check_nondegeneracy(const CriticalPointSearch& interior, const CriticalPointSearch& boundary,
                                        const Domain& domain, double tol);

/// Eigen-decomposition based classification of a symmetric matrix.
struct Signature {
  int p = 0;
  int q = 0;
  int zero = 0;
  double det = 0.0;
  double min_abs = 0.0;
};
Signature signature(const Matrix& symmetric, double eigen_tol);

}  // namespace levelvol
