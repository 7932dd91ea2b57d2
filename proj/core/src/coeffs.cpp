#include "levelvol/coeffs.hpp"

#include "levelvol/types.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace levelvol {

std::string to_string(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

std::string_view to_string(DiscontinuityKind kind) {
  switch (kind) {
    case DiscontinuityKind::jump: return "jump";
    case DiscontinuityKind::log_like: return "log_like";
    case DiscontinuityKind::root_like: return "root_like";
  }
  return "unknown";
}

std::optional<DiscontinuityKind> parse_discontinuity_kind(std::string_view text) {
  if (text == "jump") return DiscontinuityKind::jump;
  if (text == "log_like") return DiscontinuityKind::log_like;
  if (text == "root_like") return DiscontinuityKind::root_like;
  return std::nullopt;
}

Classification classify(int p, int q, bool boundary) {
  if (p < 0 || q < 0 || p + q < 1) throw InvalidArgument("classify: need p, q >= 0 and p + q >= 1");
  Classification c;
  const bool p_even = p % 2 == 0;
  const bool q_even = q % 2 == 0;
  if (p_even && q_even) c.kind = DiscontinuityKind::jump;
  else if (!p_even && !q_even) c.kind = DiscontinuityKind::log_like;
  else c.kind = DiscontinuityKind::root_like;
  const int twice_power = p + q + (boundary ? 2 : 0);
  c.break_order = (twice_power + 1) / 2;
  return c;
}

namespace {

using Int = boost::multiprecision::cpp_int;

Int binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  Int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

int sign_pow(int e) { return (e % 2 == 0) ? 1 : -1; }

void require_pq(int p, int q, const char* what) {
  if (p < 1 || q < 1) throw InvalidArgument(std::string(what) + ": need p, q >= 1");
}

// a_j = sum_{k+m=j} C(p-1,k) C(q-1,m) (-1)^m: coefficients of
// (1+x)^{p-1} (1-x)^{q-1}, j = 0..p+q-2.
std::vector<Int> mixed_binomials(int p, int q) {
  std::vector<Int> a(static_cast<std::size_t>(p + q - 1), 0);
  for (int k = 0; k < p; ++k)
    for (int m = 0; m < q; ++m) a[static_cast<std::size_t>(k + m)] += binom(p - 1, k) * binom(q - 1, m) * sign_pow(m);
  return a;
}

// Exact integral over t in [0,1] of t^e (1-t)^{p-1} (1+t)^{q-1}.
Rational beta_like_integral(int p, int q, int e) {
  Rational sum = 0;
  for (int k = 0; k < p; ++k)
    for (int m = 0; m < q; ++m)
      sum += Rational(binom(p - 1, k) * binom(q - 1, m) * sign_pow(k)) / (k + m + e + 1);
  return sum;
}

double pow_int(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double falling(double s, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= s - i;
  return r;
}

}  // namespace

Rational sigma1(int p, int q) {
  require_pq(p, q, "sigma1");
  const int n = p + q;
  Rational sum = 0;
  for (int k = 0; k < p; ++k)
    for (int m = 0; m < q; ++m)
      if (2 * (k + m + 1) != n) sum += Rational(binom(p - 1, k) * binom(q - 1, m) * sign_pow(m)) / (n - 2 * (k + m + 1));
  return sum;
}

Rational sigma2(int p, int q) {
  require_pq(p, q, "sigma2");
  const int n = p + q;
  Rational sum = 0;
  for (int k = 0; k < p; ++k)
    for (int m = 0; m < q; ++m)
      if (2 * (k + m + 1) == n) sum += Rational(binom(p - 1, k) * binom(q - 1, m) * sign_pow(m));
  return sum;
}

Rational printed_gamma(int p, int q) {
  require_pq(p, q, "printed_gamma");
  const int n = p + q;
  Rational sum = 0;
  for (int k = 0; k < p; ++k)
    for (int m = 0; m < q; ++m)
      sum += Rational(binom(p - 1, k) * binom(q - 1, m) * sign_pow(p - 1 - k)) / (n * (n - (k + m + 1)));
  return sum;
}

Expansion expansion(int p, int q, bool boundary) {
  require_pq(p, q, "expansion");
  const int n = p + q;
  const auto a = mixed_binomials(p, q);
  const int jstar = (n % 2 == 0) ? n / 2 - 1 : -1;  // the term with 2(j+1) = n
  const Rational s1 = sigma1(p, q);
  const Rational s2 = sigma2(p, q);

  // Interior: expanding the h < 0 branch term by term gives
  //   P(h)   = sum_{j != j*} a_j h^{j+1} / ((j+1)(n-2-2j))
  //   gamma  = sum_j a_j (-1)^j / (n (j+1))
  //   alpha+ = 2 s2 / n^2 - 2 s1 / n
  //   alpha- = (2/n) sum_{j != j*} a_j (-1)^j / (n-2-2j) - 2 (-1)^{n/2-1} s2 / n^2
  //   beta   = -2 s2 / n
  // which agrees with direct quadrature of both branches.
  std::vector<Rational> poly(static_cast<std::size_t>(n), 0);
  Rational gamma_minus = 0;
  Rational alt_sum = 0;
  for (int j = 0; j <= n - 2; ++j) {
    const Rational aj(a[static_cast<std::size_t>(j)]);
    gamma_minus += aj * sign_pow(j) / Rational(n * (j + 1));
    if (j == jstar) continue;
    poly[static_cast<std::size_t>(j + 1)] = aj / Rational((j + 1) * (n - 2 - 2 * j));
    alt_sum += aj * sign_pow(j) / Rational(n - 2 - 2 * j);
  }
  const Rational nn(n);
  Rational alpha_plus = Rational(2) * s2 / (nn * nn) - Rational(2) * s1 / nn;
  Rational alpha_minus = Rational(2) * alt_sum / nn;
  if (n % 2 == 0) alpha_minus -= Rational(2 * sign_pow(n / 2 - 1)) * s2 / (nn * nn);
  Rational beta = Rational(-2) * s2 / nn;

  Expansion e;
  e.p = p;
  e.q = q;
  e.boundary = boundary;
  if (!boundary) {
    e.poly = std::move(poly);
    e.alpha_plus = alpha_plus;
    e.alpha_minus = alpha_minus;
    e.beta = beta;
    e.gamma_minus = gamma_minus;
    e.gamma_plus = beta_like_integral(p, q, 0) / nn;
    e.gamma = e.gamma_minus;
    e.singular_power = Rational(n) / 2;
    return e;
  }

  // Boundary: the weight (h - uv) vanishes on the moving edge uv = h, so
  // dI_bd/dh equals the interior I and I_bd(h) = I_bd(0) + int_0^h I.
  const Rational s = Rational(n + 2) / 2;
  e.poly.assign(static_cast<std::size_t>(n + 1), 0);
  for (std::size_t k = 1; k < poly.size(); ++k) e.poly[k + 1] = poly[k] / Rational(static_cast<long>(k + 1));
  e.delta = gamma_minus;
  e.beta = beta / s;
  e.alpha_plus = alpha_plus / s - beta / (Rational(2) * s * s);
  e.alpha_minus = -alpha_minus / s;
  if (beta != 0) {
    // beta != 0 implies n even, so s is an integer.
    const int si = (n + 2) / 2;
    e.alpha_minus -= Rational(sign_pow(si)) * beta / (Rational(2) * s * s);
  }
  Rational gb = 0;
  for (int j = 0; j <= n - 2; ++j)
    gb += Rational(a[static_cast<std::size_t>(j)] * sign_pow(j)) / Rational((j + 2) * (n + 2));
  e.gamma_minus = gb;
  e.gamma_plus = beta_like_integral(p, q, 1) / Rational(n + 2);
  e.gamma = gb;
  e.singular_power = s;
  return e;
}

double eval_I(const Expansion& e, double h) {
  if (!(std::abs(h) < 1.0)) throw InvalidArgument("eval_I: need |h| < 1 (outside the standard box)");
  double v = e.gamma.convert_to<double>();
  if (h == 0.0) return v;
  double hk = 1.0;
  for (std::size_t k = 1; k < e.poly.size(); ++k) {
    hk *= h;
    if (e.poly[k] != 0) v += e.poly[k].convert_to<double>() * hk;
  }
  if (e.boundary) v += e.delta.convert_to<double>() * h;
  const double s = e.singular_power.convert_to<double>();
  const double ah = std::abs(h);
  v += (h > 0.0 ? e.alpha_plus : e.alpha_minus).convert_to<double>() * std::pow(ah, s);
  if (e.beta != 0) {
    const int si = static_cast<int>(numerator(e.singular_power) / denominator(e.singular_power));
    v += e.beta.convert_to<double>() * pow_int(h, si) * 0.5 * std::log(ah);
  }
  return v;
}

double one_sided_derivative_at_zero(const Expansion& e, int k, int side) {
  if (k < 0) throw InvalidArgument("one_sided_derivative_at_zero: negative order");
  if (side != 1 && side != -1) throw InvalidArgument("one_sided_derivative_at_zero: side must be +1 or -1");
  if (k == 0) return e.gamma.convert_to<double>();
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  double d = 0.0;
  if (static_cast<std::size_t>(k) < e.poly.size()) d += e.poly[static_cast<std::size_t>(k)].convert_to<double>() * fact;
  if (e.boundary && k == 1) d += e.delta.convert_to<double>();

  const bool integer_power = denominator(e.singular_power) == 1;
  const double s = e.singular_power.convert_to<double>();
  const double alpha = (side > 0 ? e.alpha_plus : e.alpha_minus).convert_to<double>();
  const double inf = std::numeric_limits<double>::infinity();

  // alpha (side h)^s: k-th derivative is alpha side^k s(s-1)..(s-k+1) |h|^{s-k}.
  if (alpha != 0.0) {
    if (integer_power) {
      if (k == static_cast<int>(s)) d += alpha * (side < 0 && k % 2 ? -1.0 : 1.0) * fact;
    } else if (k > s) {
      const double c = alpha * (side < 0 && k % 2 ? -1.0 : 1.0) * falling(s, k);
      return c > 0 ? inf : -inf;
    }
  }
  // beta h^s log sqrt|h| with integer s: d^s/dh^s ~ (s!/2) log|h| -> -inf * beta;
  // higher orders behave like h^{s-k}.
  if (e.beta != 0) {
    const int si = static_cast<int>(s);
    const double b = e.beta.convert_to<double>();
    if (k == si) return b > 0 ? -inf : inf;
    if (k > si) {
      // leading term: b * (s!/2) * (-1)^{k-s-1} (k-s-1)! h^{s-k}
      const double c = b * ((k - si - 1) % 2 ? -1.0 : 1.0) * (side < 0 && (k - si) % 2 ? -1.0 : 1.0);
      return c > 0 ? inf : -inf;
    }
  }
  return d;
}

void write_coeff_table(std::ostream& out, int p_max, int q_max, bool with_boundary) {
  if (p_max < 1 || q_max < 1) throw InvalidArgument("write_coeff_table: p_max and q_max must be >= 1");
  out << "p,q,boundary,gamma,alpha_plus,alpha_minus,beta,delta,singular_power,kind\n";
  for (int pass = 0; pass < (with_boundary ? 2 : 1); ++pass) {
    const bool boundary = pass == 1;
    for (int p = 1; p <= p_max; ++p) {
      for (int q = 1; q <= q_max; ++q) {
        const Expansion e = expansion(p, q, boundary);
        out << p << ',' << q << ',' << (boundary ? 1 : 0) << ',' << to_string(e.gamma) << ','
            << to_string(e.alpha_plus) << ',' << to_string(e.alpha_minus) << ',' << to_string(e.beta) << ','
            << (boundary ? to_string(e.delta) : std::string()) << ',' << to_string(e.singular_power) << ','
            << to_string(classify(p, q, boundary).kind) << '\n';
      }
    }
  }
}

}  // namespace levelvol
