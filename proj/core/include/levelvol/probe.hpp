#pragma once

#include "levelvol/coeffs.hpp"
#include "levelvol/morse.hpp"
#include "levelvol/volume.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace levelvol {

struct Prediction {
  int order = 1;
  DiscontinuityKind kind = DiscontinuityKind::jump;
  /// Exponent of the leading singular term of vol(V_h) in h - h_star:
  /// order for jump and log_like, order - 1/2 for root_like.
  double singular_power = 1.0;
  /// Expected magnitude of that term's coefficient (the larger one-sided
  /// amplitude for root_like, the log amplitude for log_like), assuming the
  /// field is quadratic near the point. Zero when unknown.
  double amplitude = 0.0;
};

/// Expected singularity of the volume curve at cp.value: order
/// ceil(n/2) (interior) or ceil((n+1)/2) (boundary), kind from the parity
/// of (p, q). Throws InvalidArgument for degenerate points or when p + q
/// does not match n for the site.
Prediction predict(const CriticalPoint& cp, int n, double eigen_tol = 0.0);

/// One derivative estimate from a one-sided divided difference over
/// consecutive levels. `offset` is the distance from h_star to the farthest
/// level used.
struct DerivativeEstimate {
  double offset = 0.0;
  double value = 0.0;
  double noise = 0.0;
};

/// ladder[k-1] holds the order-k estimates, nearest rung first.
struct OneSidedDerivatives {
  std::vector<std::vector<DerivativeEstimate>> left;
  std::vector<std::vector<DerivativeEstimate>> right;
};

/// Needs at least order + 1 levels strictly on each side of h_star.
OneSidedDerivatives one_sided_derivatives(const VolumeCurve& curve, double h_star, int order);

struct ProbeOptions {
  /// Degrees of the smooth polynomial background. A verdict must come out
  /// the same for every listed degree. Empty picks {3, 4} for noisy curves
  /// and {9, 10} for exact ones.
  std::vector<int> poly_degrees;
  /// The best candidate model must beat every other candidate by this much
  /// chi-square.
  double ambiguity_margin = 10.0;
  /// Smooth verdict without a prediction: every singular amplitude must be
  /// resolved to this fraction of the volume change across the window.
  double resolution = 0.2;
  /// Smooth verdict with a predicted amplitude A: noise_mult * sd <= ratio * A.
  double power_ratio = 0.5;
};

/// Richardson-extrapolated difference of the one-sided k-th derivatives.
struct OrderDiagnostics {
  int order = 1;
  double jump = 0.0;
  double jump_noise = 0.0;
  double systematic = 0.0;
  double offset = 0.0;  // rung offset used
  bool resolved = false;  // some rung has enough levels on both sides
};

struct ModelFit {
  std::string model;  // "smooth", "jump", "root", "log"
  int order = 0;      // zero for "smooth"
  int degree = 0;
  double chi2 = 0.0;
  int dof = 0;
  bool acceptable = false;
  bool significant = false;
  /// Singular amplitudes in volume per h^power units, with standard errors.
  std::vector<std::pair<std::string, double>> coefficients;
  std::vector<double> coefficient_noise;
};

struct SingularityReport {
  double h_star = 0.0;
  std::optional<int> predicted_order;
  std::optional<DiscontinuityKind> predicted_kind;
  std::optional<double> predicted_amplitude;
  /// Set when a break was found.
  std::optional<int> measured_order;
  /// True when no singular model is needed and the data could have shown one.
  bool smooth_to_max_tested = false;
  std::optional<DiscontinuityKind> measured_kind;
  bool inconclusive = false;
  std::vector<std::pair<std::string, double>> fit_coefficients;
  double residual = 0.0;
  int max_order_tested = 0;
  double noise_mult = 5.0;
  double half_width = 0.0;
  std::vector<OrderDiagnostics> orders;
  std::vector<ModelFit> fits;
  std::string note;

  /// Confident verdict equal to the prediction.
  bool matches_prediction() const;
};

/// Fits the curve within the largest symmetric window around h_star with a
/// polynomial plus, in turn, each singular model (jump A x+^k, root
/// A+ x+^(k-1/2) + A- x-^(k-1/2), log B x^k log|x| + A x+^k) for k up to
/// max_order. A model is a candidate when its chi-square is acceptable and
/// its distinguishing amplitude exceeds noise_mult standard errors. One
/// clear winner gives the order and kind; no candidate gives the smooth
/// verdict when the noise is small enough; anything else is inconclusive.
SingularityReport measure(const VolumeCurve& curve, double h_star, int max_order, double noise_mult = 5.0,
                          const ProbeOptions& options = {});

/// Same, filling in the prediction fields. A nonzero predicted amplitude
/// sets the noise needed for a smooth verdict.
SingularityReport measure(const VolumeCurve& curve, double h_star, const Prediction& prediction, int max_order,
                          double noise_mult = 5.0, const ProbeOptions& options = {});

}  // namespace levelvol
