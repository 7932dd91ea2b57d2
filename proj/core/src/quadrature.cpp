#include "levelvol/quadrature.hpp"

#include "levelvol/types.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace levelvol {

namespace {

struct Kernel {
  int p;
  int q;
  bool boundary;
  double h;

  double operator()(double u, double v) const {
    double k = std::pow(u + v, p - 1) * std::pow(u - v, q - 1);
    if (boundary) k *= h - u * v;
    return k;
  }
};

// Inner integral over v in [lo, hi]. The integrand has degree at most
// p + q - 1 <= 2*10 - 1, so a 10-point rule is exact for p + q <= 20.
double inner(const Kernel& k, double u, double lo, double hi) {
  using boost::math::quadrature::gauss;
  if (hi == lo) return 0.0;
  return gauss<double, 10>::integrate([&](double v) { return k(u, v); }, lo, hi);
}

template <typename F>
double outer(F f, double a, double b, double tol, double& err_sum) {
  using boost::math::quadrature::gauss_kronrod;
  if (b <= a) return 0.0;
  double err = 0.0;
  // Relative tolerances near roundoff only make the error estimate grow.
  const double rel = std::max(tol * 1e-3, 64 * std::numeric_limits<double>::epsilon());
  const double r = gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel, &err);
  err_sum += err;
  return r;
}

}  // namespace

double oracle_I(int p, int q, bool boundary, double h, double tol) {
  if (p < 1 || q < 1) throw InvalidArgument("oracle_I: need p, q >= 1");
  if (p + q > 20) throw InvalidArgument("oracle_I: p + q > 20 not supported");
  if (!(std::abs(h) < 1.0)) throw InvalidArgument("oracle_I: need |h| < 1 (outside the standard box)");
  if (!(tol > 0.0)) throw InvalidArgument("oracle_I: tol must be positive");
  const Kernel k{p, q, boundary, h};
  double err = 0.0;
  double total = 0.0;
  if (h < 0.0) {
    total = outer([&](double u) { return inner(k, u, -u, h / u); }, std::sqrt(-h), 1.0, tol, err);
  } else {
    const double r = std::sqrt(h);
    total += outer([&](double u) { return inner(k, u, -u, 0.0); }, 0.0, 1.0, tol, err);
    total += outer([&](double u) { return inner(k, u, 0.0, u); }, 0.0, r, tol, err);
    total += outer([&](double u) { return inner(k, u, 0.0, h / u); }, r, 1.0, tol, err);
  }
  if (!(err <= tol) || !std::isfinite(total)) {
    std::ostringstream msg;
    msg << "oracle_I(" << p << ", " << q << (boundary ? ", boundary" : ", interior") << ", h=" << h
        << "): achieved error " << err << " exceeds tolerance " << tol;
    throw QuadratureError(msg.str(), total, err);
  }
  return total;
}

}  // namespace levelvol
