#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace levelvol {

using Point = Eigen::VectorXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when an argument violates an operation's precondition
/// (dimension mismatch, empty input, inconsistent Morse type, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Axis-aligned box [lo, hi].
struct Box {
  Vector lo;
  Vector hi;

  int dimension() const { return static_cast<int>(lo.size()); }
  double volume() const { return (hi - lo).prod(); }
  bool contains(const Point& x) const {
    return ((x.array() >= lo.array()) && (x.array() <= hi.array())).all();
  }
};

inline void require_dimension(const Point& x, int n, const char* what) {
  if (x.size() != n) {
    throw InvalidArgument(std::string(what) + ": point has dimension " +
                          std::to_string(x.size()) + ", expected " +
                          std::to_string(n));
  }
}

}  // namespace levelvol
