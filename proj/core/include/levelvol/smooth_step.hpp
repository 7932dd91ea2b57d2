#pragma once

#include <cmath>

namespace levelvol::detail {

// Value and first two derivatives of a scalar function at one point.
struct Jet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// psi(t) = exp(-1/t) for t > 0, 0 otherwise. C-infinity, flat at 0.
inline Jet flat_exp(double t) {
  if (t <= 0.0) return {};
  const double e = std::exp(-1.0 / t);
  const double it = 1.0 / t;
  return {e, e * it * it, e * (it * it * it * it - 2.0 * it * it * it)};
}

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
inline Jet smooth_step(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  const Jet a = flat_exp(t);
  const Jet b0 = flat_exp(1.0 - t);
  // chain rule for b(t) = psi(1 - t)
  const Jet b{b0.v, -b0.d1, b0.d2};
  const double d = a.v + b.v;
  const double dd1 = a.d1 + b.d1;
  const double dd2 = a.d2 + b.d2;
  const double s = a.v / d;
  const double s1 = (a.d1 * d - a.v * dd1) / (d * d);
  const double s2 = (a.d2 * d - a.v * dd2) / (d * d) - 2.0 * dd1 * (a.d1 * d - a.v * dd1) / (d * d * d);
  return {s, s1, s2};
}

}  // namespace levelvol::detail
