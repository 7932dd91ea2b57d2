#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace levelvol {

using Rational = boost::multiprecision::cpp_rational;

/// "num/den", always with a denominator ("0/1", "-3/2").
std::string to_string(const Rational& r);

enum class DiscontinuityKind { jump, log_like, root_like };

std::string_view to_string(DiscontinuityKind kind);
std::optional<DiscontinuityKind> parse_discontinuity_kind(std::string_view text);

struct Classification {
  DiscontinuityKind kind = DiscontinuityKind::jump;
  int break_order = 1;
};

/// Parity rule for a critical point of Morse type (p, q). Zero counts as
/// even, so extrema (p = 0 or q = 0) are covered as well. Interior points
/// break at order ceil((p+q)/2), boundary points (p + q = n - 1) at
/// ceil((p+q+2)/2).
Classification classify(int p, int q, bool boundary = false);

/// Sum over k < p, m < q with 2(k+m+1) != p+q of
///   C(p-1,k) C(q-1,m) (-1)^m / (p+q - 2(k+m+1)).
Rational sigma1(int p, int q);
/// Same terms without the denominator, restricted to 2(k+m+1) = p+q.
Rational sigma2(int p, int q);

/// Local volume I(h) of the unit standard box near a saddle of type (p, q)
/// (constant Jacobian factor removed):
///
///   I(h) = gamma + sum_k poly[k] h^k + alpha_side |h|^s
///          + beta * h^s * log(sqrt|h|)     (+ delta * h when boundary)
///
/// with s = singular_power, alpha_side = alpha_plus for h > 0 and
/// alpha_minus for h < 0. The log term uses the signed power h^s; beta is
/// nonzero only when s is an integer, so one beta serves both sides.
///
/// gamma_plus is the exact area of the h = 0 region, gamma_minus the limit
/// of the h < 0 branch; `gamma` holds the common value.
struct Expansion {
  int p = 1;
  int q = 1;
  bool boundary = false;
  std::vector<Rational> poly;  // poly[k] multiplies h^k; poly[0] == 0
  Rational alpha_plus;
  Rational alpha_minus;
  Rational beta;
  Rational gamma;
  Rational gamma_plus;
  Rational gamma_minus;
  Rational delta;  // zero for interior expansions
  Rational singular_power;
};

Expansion expansion(int p, int q, bool boundary = false);

/// The constant as printed for gamma (interior) and delta (boundary):
///   sum_{k,m} C(p-1,k) C(q-1,m) (-1)^{p-1-k} / ((p+q)(p+q-(k+m+1))).
Rational printed_gamma(int p, int q);

/// |h| < 1 required; h == 0 returns gamma.
double eval_I(const Expansion& e, double h);

/// Limit of the k-th derivative of I at 0 from the given side (+1 or -1).
/// Returns +-infinity when the derivative diverges.
double one_sided_derivative_at_zero(const Expansion& e, int k, int side);

/// Coefficient table CSV: p,q,boundary,gamma,alpha_plus,alpha_minus,beta,
/// delta,singular_power,kind. One interior row per (p, q), followed by the
/// boundary rows when `with_boundary` is set. delta is empty on interior rows.
void write_coeff_table(std::ostream& out, int p_max, int q_max, bool with_boundary = false);

}  // namespace levelvol
