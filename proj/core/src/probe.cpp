#include "levelvol/probe.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace levelvol {

bool SingularityReport::matches_prediction() const {
  if (inconclusive || !predicted_order || !predicted_kind) return false;
  return measured_order == predicted_order && measured_kind == predicted_kind;
}

namespace {

double sphere_area(int m) { return 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m); }

// Saddle amplitude of the unit standard box, before the Jacobian factor.
double saddle_amplitude(int p, int q, bool boundary, DiscontinuityKind kind) {
  const Expansion e = expansion(p, q, boundary);
  const double ap = e.alpha_plus.convert_to<double>();
  const double am = e.alpha_minus.convert_to<double>();
  const double c = sphere_area(p) * sphere_area(q) * std::pow(2.0, 1 - p - q);
  switch (kind) {
    case DiscontinuityKind::jump: {
      const int s = e.singular_power.convert_to<int>();
      return c * std::abs(ap - (s % 2 == 0 ? am : -am));
    }
    case DiscontinuityKind::log_like: return c * std::abs(e.beta.convert_to<double>()) / 2.0;
    case DiscontinuityKind::root_like: return c * std::max(std::abs(ap), std::abs(am));
  }
  return 0.0;
}

}  // namespace

Prediction predict(const CriticalPoint& cp, int n, double eigen_tol) {
  if (n < 1) throw InvalidArgument("predict: dimension must be positive");
  if (cp.degenerate(eigen_tol)) throw InvalidArgument("predict: degenerate critical point; the theorems do not apply");
  const bool boundary = cp.site == Site::boundary;
  const int expected = boundary ? n - 1 : n;
  if (cp.morse_p + cp.morse_q != expected)
    throw InvalidArgument("predict: Morse type (" + std::to_string(cp.morse_p) + "," + std::to_string(cp.morse_q) +
                          ") does not match dimension " + std::to_string(n) + " for a " +
                          std::string(to_string(cp.site)) + " point");
  const Classification c = classify(cp.morse_p, cp.morse_q, boundary);
  Prediction pr;
  pr.order = c.break_order;
  pr.kind = c.kind;
  pr.singular_power = c.kind == DiscontinuityKind::root_like ? c.break_order - 0.5 : c.break_order;

  // Jacobian of the map to standard coordinates at the point.
  const int m = expected;
  double jac = std::pow(2.0, 0.5 * m) / std::sqrt(std::abs(cp.hessian_det));
  if (boundary) {
    if (!(cp.gradient_norm > 0.0)) return pr;
    jac /= cp.gradient_norm;
  }
  if (!std::isfinite(jac)) return pr;
  double unit = 0.0;
  if (cp.morse_p == 0 || cp.morse_q == 0)
    unit = boundary ? 2.0 * sphere_area(m) / (static_cast<double>(n) * n - 1.0) : sphere_area(n) / n;
  else
    unit = saddle_amplitude(cp.morse_p, cp.morse_q, boundary, c.kind);
  pr.amplitude = jac * unit;
  return pr;
}

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

struct Sides {
  std::vector<std::size_t> left;   // nearest first
  std::vector<std::size_t> right;  // nearest first
};

Sides split_sides(const VolumeCurve& curve, double h_star, double max_offset) {
  Sides s;
  for (std::size_t i = curve.size(); i-- > 0;)
    if (curve.levels[i] < h_star && h_star - curve.levels[i] <= max_offset) s.left.push_back(i);
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (curve.levels[i] > h_star && curve.levels[i] - h_star <= max_offset) s.right.push_back(i);
  return s;
}

void check_curve(const VolumeCurve& curve) {
  if (curve.volumes.size() != curve.levels.size() || curve.stderrs.size() != curve.levels.size())
    throw InvalidArgument("probe: curve levels, volumes and stderr differ in length");
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (!(curve.levels[i] > curve.levels[i - 1])) throw InvalidArgument("probe: levels must be strictly increasing");
}

// Covariance of the curve's volume estimates, with a small diagonal floor
// for roundoff and the Monte Carlo counting quantum.
Matrix curve_covariance(const VolumeCurve& curve, double extra_floor) {
  const auto m = static_cast<Eigen::Index>(curve.size());
  double vmax = 0.0;
  for (double v : curve.volumes) vmax = std::max(vmax, std::abs(v));
  double floor2 = std::pow(64.0 * std::numeric_limits<double>::epsilon() * vmax, 2) + std::pow(extra_floor * vmax, 2);
  if (curve.method == VolumeMethod::monte_carlo && curve.sample_count > 0)
    floor2 += std::pow(curve.box_volume / static_cast<double>(curve.sample_count), 2);
  Matrix c = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      double v = volume_covariance(curve, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (curve.method != VolumeMethod::monte_carlo && i == j) v = curve.stderrs[static_cast<std::size_t>(i)] *
                                                                  curve.stderrs[static_cast<std::size_t>(i)];
      c(i, j) = v;
      c(j, i) = v;
    }
    c(i, i) += floor2;
  }
  return c;
}

// k! * f[x_j, ..., x_{j+k}] as weights on the curve entries.
Vector divided_difference(const VolumeCurve& curve, const std::vector<std::size_t>& side, double h_star, std::size_t j,
                          int k) {
  Vector w = Vector::Zero(static_cast<Eigen::Index>(curve.size()));
  const double kf = factorial(k);
  for (std::size_t a = j; a <= j + static_cast<std::size_t>(k); ++a) {
    const double xa = curve.levels[side[a]] - h_star;
    double denom = 1.0;
    for (std::size_t b = j; b <= j + static_cast<std::size_t>(k); ++b)
      if (b != a) denom *= xa - (curve.levels[side[b]] - h_star);
    w[static_cast<Eigen::Index>(side[a])] += kf / denom;
  }
  return w;
}

struct Stat {
  Vector w;
  double value = 0.0;
  double noise = 0.0;
};

Stat make_stat(Vector w, const Vector& v, const Matrix& cov) {
  Stat s;
  s.value = w.dot(v);
  s.noise = std::sqrt(std::max(0.0, w.dot(cov * w)));
  s.w = std::move(w);
  return s;
}

struct Ladder {
  std::vector<Stat> d;   // raw divided differences, nearest first
  std::vector<Stat> r;   // Richardson combinations 2 d[j] - d[j+1]
  std::vector<Stat> dr;  // r[j] - r[j+1]
  std::vector<double> offset;
};

Ladder build_ladder(const VolumeCurve& curve, const std::vector<std::size_t>& side, double h_star, int k,
                    const Vector& v, const Matrix& cov) {
  Ladder l;
  const std::size_t need = static_cast<std::size_t>(k) + 1;
  if (side.size() < need) return l;
  for (std::size_t j = 0; j + need <= side.size(); ++j) {
    l.d.push_back(make_stat(divided_difference(curve, side, h_star, j, k), v, cov));
    l.offset.push_back(std::abs(curve.levels[side[j + need - 1]] - h_star));
  }
  for (std::size_t j = 0; j + 1 < l.d.size(); ++j) l.r.push_back(make_stat(2.0 * l.d[j].w - l.d[j + 1].w, v, cov));
  for (std::size_t j = 0; j + 1 < l.r.size(); ++j) l.dr.push_back(make_stat(l.r[j].w - l.r[j + 1].w, v, cov));
  return l;
}

// Extrapolated jump at the rung with the smallest total uncertainty.
OrderDiagnostics ladder_jump(const VolumeCurve& curve, const Sides& sides, double h_star, int k, const Vector& v,
                             const Matrix& cov, double systematic_factor) {
  OrderDiagnostics od;
  od.order = k;
  const Ladder left = build_ladder(curve, sides.left, h_star, k, v, cov);
  const Ladder right = build_ladder(curve, sides.right, h_star, k, v, cov);
  const std::size_t positions = std::min(left.dr.size(), right.dr.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < positions; ++j) {
    const Stat jump = make_stat(right.r[j].w - left.r[j].w, v, cov);
    const double sys = systematic_factor * (std::abs(left.dr[j].value) + std::abs(right.dr[j].value));
    if (jump.noise + sys < best) {
      best = jump.noise + sys;
      od.jump = jump.value;
      od.jump_noise = jump.noise;
      od.systematic = sys;
      od.offset = std::max(left.offset[j], right.offset[j]);
      od.resolved = true;
    }
  }
  return od;
}

struct FitData {
  Vector x;  // scaled offsets (h - h_star) / w
  Vector y;
  Matrix whiten;  // L^{-1}
  double w = 1.0;
};

Vector side_power(const Vector& x, double p, int side) {
  Vector c(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double t = side * x[i];
    c[i] = t > 0 ? std::pow(t, p) : 0.0;
  }
  return c;
}

ModelFit fit_model(const std::string& name, const FitData& d, int k, int degree, double m) {
  const auto n = d.x.size();
  std::vector<std::string> names;
  std::vector<Vector> extra;
  double power = k;
  if (name == "jump") {
    extra.push_back(side_power(d.x, k, 1));
    names = {"A"};
  } else if (name == "root") {
    power = k - 0.5;
    extra.push_back(side_power(d.x, power, 1));
    extra.push_back(side_power(d.x, power, -1));
    names = {"A_plus", "A_minus"};
  } else if (name == "log") {
    Vector c(n);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = std::pow(d.x[i], k) * std::log(std::abs(d.x[i]));
    extra.push_back(c);
    extra.push_back(side_power(d.x, k, 1));
    names = {"B", "A"};
  }
  const auto np = static_cast<Eigen::Index>(degree + 1 + static_cast<int>(extra.size()));
  Matrix x(n, np);
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = 1.0;
    for (int e = 0; e <= degree; ++e, t *= d.x[i]) x(i, e) = t;
  }
  for (std::size_t e = 0; e < extra.size(); ++e) x.col(degree + 1 + static_cast<Eigen::Index>(e)) = extra[e];

  const Matrix xw = d.whiten * x;
  const Vector yw = d.whiten * d.y;
  Eigen::JacobiSVD<Matrix> svd(xw, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cut = sv[0] * 1e-13;
  Vector inv(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) inv[i] = sv[i] > cut ? 1.0 / sv[i] : 0.0;
  const Vector beta = svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * yw);
  const Matrix cov = svd.matrixV() * inv.array().square().matrix().asDiagonal() * svd.matrixV().transpose();

  ModelFit f;
  f.model = name;
  f.order = name == "smooth" ? 0 : k;
  f.degree = degree;
  f.chi2 = (yw - xw * beta).squaredNorm();
  f.dof = static_cast<int>(n - np);
  f.acceptable = f.dof > 0 && f.chi2 <= f.dof + m * std::sqrt(2.0 * f.dof);
  // The log model is told apart by B alone; A x+^k is shared with jump.
  const std::size_t tested = name == "log" ? 1 : extra.size();
  const double unit = std::pow(d.w, power);
  for (std::size_t e = 0; e < extra.size(); ++e) {
    const auto idx = degree + 1 + static_cast<Eigen::Index>(e);
    const double sd = std::sqrt(std::max(0.0, cov(idx, idx)));
    if (e < tested && std::abs(beta[idx]) > m * sd) f.significant = true;
    f.coefficients.emplace_back(names[e], beta[idx] / unit);
    f.coefficient_noise.push_back(sd / unit);
  }
  return f;
}

DiscontinuityKind kind_of(const std::string& model) {
  return model == "jump" ? DiscontinuityKind::jump
         : model == "root" ? DiscontinuityKind::root_like
                           : DiscontinuityKind::log_like;
}

std::string_view model_of(DiscontinuityKind kind) {
  switch (kind) {
    case DiscontinuityKind::jump: return "jump";
    case DiscontinuityKind::root_like: return "root";
    case DiscontinuityKind::log_like: return "log";
  }
  return "jump";
}

struct Verdict {
  enum class Kind { smooth, singular, inconclusive } kind = Kind::inconclusive;
  std::size_t chosen = 0;  // index into the fit list
  std::string note;
};

// Model selection at one background degree; fits[first, last) hold that
// degree's singular models. An inconclusive verdict with an empty note
// means no candidate and no predicted amplitude to compare against.
Verdict select(const std::vector<ModelFit>& fits, std::size_t first, std::size_t last, double m,
               const Prediction* prediction, const ProbeOptions& opt) {
  Verdict v;
  std::vector<const ModelFit*> cand;
  for (std::size_t i = first; i < last; ++i)
    if (fits[i].acceptable && fits[i].significant) cand.push_back(&fits[i]);
  const int degree = fits[first].degree;
  if (cand.empty()) {
    if (prediction && prediction->amplitude > 0.0) {
      const std::string_view model = model_of(prediction->kind);
      for (std::size_t i = first; i < last; ++i) {
        const ModelFit& f = fits[i];
        if (f.model != model || f.order != prediction->order) continue;
        double sd = f.coefficient_noise[0];
        if (f.model == "root") sd = std::max(sd, f.coefficient_noise[1]);
        if (m * sd <= opt.power_ratio * prediction->amplitude) {
          v.kind = Verdict::Kind::smooth;
        } else {
          v.note = "noise too large to rule out the predicted singularity (degree " + std::to_string(degree) + ")";
        }
        return v;
      }
    }
    // No usable prediction: the caller checks the noise against the window.
    return v;
  }
  const auto best = *std::min_element(cand.begin(), cand.end(),
                                      [](const ModelFit* a, const ModelFit* b) { return a->chi2 < b->chi2; });
  for (const ModelFit* c : cand) {
    if (c != best && c->chi2 < best->chi2 + opt.ambiguity_margin) {
      v.note = "order " + std::to_string(best->order) + " " + best->model + " and order " + std::to_string(c->order) +
               " " + c->model + " fit about equally well (degree " + std::to_string(degree) + ")";
      return v;
    }
  }
  v.kind = Verdict::Kind::singular;
  v.chosen = static_cast<std::size_t>(best - fits.data());
  return v;
}

SingularityReport measure_impl(const VolumeCurve& curve, double h_star, int max_order, double noise_mult,
                               const ProbeOptions& options, const Prediction* prediction) {
  check_curve(curve);
  if (max_order < 1) throw InvalidArgument("measure: max_order must be positive");
  if (!(noise_mult > 0.0)) throw InvalidArgument("measure: noise_mult must be positive");
  for (int d : options.poly_degrees)
    if (d < 0) throw InvalidArgument("measure: polynomial degrees must be non-negative");
  SingularityReport rep;
  rep.h_star = h_star;
  rep.max_order_tested = max_order;
  rep.noise_mult = noise_mult;
  if (prediction) {
    rep.predicted_order = prediction->order;
    rep.predicted_kind = prediction->kind;
    if (prediction->amplitude > 0.0) rep.predicted_amplitude = prediction->amplitude;
  }

  const bool exact = curve.method != VolumeMethod::monte_carlo &&
                     std::all_of(curve.stderrs.begin(), curve.stderrs.end(), [](double s) { return s == 0.0; });
  std::vector<int> degrees = options.poly_degrees;
  if (degrees.empty()) degrees = exact ? std::vector<int>{9, 10} : std::vector<int>{3, 4};
  const int max_degree = *std::max_element(degrees.begin(), degrees.end());

  double left_extent = 0.0;
  double right_extent = 0.0;
  for (double h : curve.levels) {
    if (h < h_star) left_extent = std::max(left_extent, h_star - h);
    if (h > h_star) right_extent = std::max(right_extent, h - h_star);
  }
  const double w = std::min(left_extent, right_extent);
  rep.half_width = w;
  const Sides sides = split_sides(curve, h_star, w * (1.0 + 1e-12));
  // Enough points for the largest model and a few degrees of freedom.
  const auto need = static_cast<std::size_t>(max_degree + 3 + 8);
  if (w <= 0.0 || sides.left.size() + sides.right.size() < need || sides.left.size() < 4 || sides.right.size() < 4) {
    rep.inconclusive = true;
    rep.note = "need at least " + std::to_string(need) + " levels around h_star, 4 on each side, within a common window";
    return rep;
  }

  const Matrix full = curve_covariance(curve, exact ? 1e-10 : 0.0);
  const Vector v = Eigen::Map<const Vector>(curve.volumes.data(), static_cast<Eigen::Index>(curve.size()));
  const double dv = std::abs(curve.volumes[sides.left.back()] - curve.volumes[sides.right.back()]);

  for (int k = 1; k <= max_order; ++k) rep.orders.push_back(ladder_jump(curve, sides, h_star, k, v, full, 3.0));

  std::vector<std::size_t> idx(sides.left.rbegin(), sides.left.rend());
  idx.insert(idx.end(), sides.right.begin(), sides.right.end());
  const auto np = static_cast<Eigen::Index>(idx.size());
  Matrix c(np, np);
  FitData fd;
  fd.w = w;
  fd.x.resize(np);
  fd.y.resize(np);
  for (Eigen::Index a = 0; a < np; ++a) {
    const auto ia = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]);
    fd.x[a] = (curve.levels[static_cast<std::size_t>(ia)] - h_star) / w;
    fd.y[a] = curve.volumes[static_cast<std::size_t>(ia)];
    for (Eigen::Index b = 0; b < np; ++b) c(a, b) = full(ia, static_cast<Eigen::Index>(idx[static_cast<std::size_t>(b)]));
  }
  Eigen::LLT<Matrix> llt(c);
  if (llt.info() != Eigen::Success) {
    rep.inconclusive = true;
    rep.note = "curve covariance is not positive definite";
    return rep;
  }
  fd.whiten = llt.matrixL().solve(Matrix::Identity(np, np));

  std::vector<Verdict> verdicts;
  std::vector<double> smooth_chi2;
  for (int degree : degrees) {
    rep.fits.push_back(fit_model("smooth", fd, 0, degree, noise_mult));
    smooth_chi2.push_back(rep.fits.back().chi2);
    const std::size_t first = rep.fits.size();
    for (int k = 1; k <= max_order; ++k)
      for (const char* name : {"jump", "root", "log"}) rep.fits.push_back(fit_model(name, fd, k, degree, noise_mult));
    verdicts.push_back(select(rep.fits, first, rep.fits.size(), noise_mult, prediction, options));
    Verdict& vd = verdicts.back();
    if (vd.kind == Verdict::Kind::inconclusive && vd.note.empty()) {
      // No prediction to size the noise against: ask for every singular
      // amplitude, in window units, to be small next to the volume change.
      double worst = 0.0;
      for (std::size_t i = first; i < rep.fits.size(); ++i) {
        const double unit = std::pow(w, rep.fits[i].model == "root" ? rep.fits[i].order - 0.5 : rep.fits[i].order);
        for (double sd : rep.fits[i].coefficient_noise) worst = std::max(worst, noise_mult * sd * unit);
      }
      if (dv > 0.0 && worst <= options.resolution * dv) {
        vd.kind = Verdict::Kind::smooth;
      } else {
        vd.note = "noise too large to resolve a singular term (degree " + std::to_string(degree) + ")";
      }
    }
  }

  const Verdict& first = verdicts.front();
  for (const Verdict& vd : verdicts) {
    if (vd.kind == Verdict::Kind::inconclusive) {
      rep.inconclusive = true;
      rep.note = vd.note;
      rep.residual = *std::min_element(smooth_chi2.begin(), smooth_chi2.end());
      return rep;
    }
  }
  for (const Verdict& vd : verdicts) {
    const bool same = vd.kind == first.kind &&
                      (vd.kind == Verdict::Kind::smooth ||
                       (rep.fits[vd.chosen].model == rep.fits[first.chosen].model &&
                        rep.fits[vd.chosen].order == rep.fits[first.chosen].order));
    if (!same) {
      rep.inconclusive = true;
      rep.note = "verdict depends on the background polynomial degree";
      rep.residual = *std::min_element(smooth_chi2.begin(), smooth_chi2.end());
      return rep;
    }
  }
  if (first.kind == Verdict::Kind::smooth) {
    rep.smooth_to_max_tested = true;
    rep.residual = smooth_chi2.front();
    return rep;
  }
  const ModelFit& chosen = rep.fits[first.chosen];
  rep.measured_order = chosen.order;
  rep.measured_kind = kind_of(chosen.model);
  rep.residual = chosen.chi2;
  if (chosen.model == "jump" && rep.orders[static_cast<std::size_t>(chosen.order - 1)].resolved)
    rep.fit_coefficients.emplace_back("jump", rep.orders[static_cast<std::size_t>(chosen.order - 1)].jump);
  for (const auto& kv : chosen.coefficients) rep.fit_coefficients.push_back(kv);
  return rep;
}

}  // namespace

OneSidedDerivatives one_sided_derivatives(const VolumeCurve& curve, double h_star, int order) {
  check_curve(curve);
  if (order < 1) throw InvalidArgument("one_sided_derivatives: order must be positive");
  const Sides s = split_sides(curve, h_star, std::numeric_limits<double>::infinity());
  const auto need = static_cast<std::size_t>(order) + 1;
  if (s.left.size() < need || s.right.size() < need)
    throw InvalidArgument("one_sided_derivatives: need at least " + std::to_string(need) +
                          " levels on each side of h_star (have " + std::to_string(s.left.size()) + " left, " +
                          std::to_string(s.right.size()) + " right)");
  const Matrix cov = curve_covariance(curve, 0.0);
  const Vector v = Eigen::Map<const Vector>(curve.volumes.data(), static_cast<Eigen::Index>(curve.size()));
  OneSidedDerivatives out;
  for (int k = 1; k <= order; ++k) {
    for (int side = 0; side < 2; ++side) {
      const Ladder l = build_ladder(curve, side == 0 ? s.left : s.right, h_star, k, v, cov);
      std::vector<DerivativeEstimate> est;
      for (std::size_t j = 0; j < l.d.size(); ++j) est.push_back({l.offset[j], l.d[j].value, l.d[j].noise});
      (side == 0 ? out.left : out.right).push_back(std::move(est));
    }
  }
  return out;
}

SingularityReport measure(const VolumeCurve& curve, double h_star, int max_order, double noise_mult,
                          const ProbeOptions& options) {
  return measure_impl(curve, h_star, max_order, noise_mult, options, nullptr);
}

SingularityReport measure(const VolumeCurve& curve, double h_star, const Prediction& prediction, int max_order,
                          double noise_mult, const ProbeOptions& options) {
  return measure_impl(curve, h_star, max_order, noise_mult, options, &prediction);
}

}  // namespace levelvol
