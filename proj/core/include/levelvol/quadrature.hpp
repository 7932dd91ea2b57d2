#pragma once

#include <stdexcept>
#include <string>

namespace levelvol {

/// Requested accuracy not reached; carries what was achieved.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& message, double estimate, double error)
      : std::runtime_error(message), estimate_(estimate), error_(error) {}
  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

 private:
  double estimate_;
  double error_;
};

/// Direct quadrature of the local volume integral in (u, v) coordinates,
///   h < 0:  int_{sqrt(-h)}^1 int_{-u}^{h/u} k dv du
///   h >= 0: int_0^1 int_{-u}^0 k + int_0^{sqrt h} int_0^u k + int_{sqrt h}^1 int_0^{h/u} k
/// with k = (u+v)^{p-1} (u-v)^{q-1}, times (h - uv) for the boundary variant.
/// The inner integral uses a Gauss-Legendre rule exact for the polynomial in
/// v, the outer one adaptive Gauss-Kronrod. Throws QuadratureError when the
/// estimated absolute error exceeds tol.
double oracle_I(int p, int q, bool boundary, double h, double tol = 1e-12);

}  // namespace levelvol
