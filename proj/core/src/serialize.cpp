#include "levelvol/serialize.hpp"

#include <cmath>

namespace levelvol {

using json = nlohmann::ordered_json;

json json_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json to_json(const Point& x) {
  json a = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(json_number(x[i]));
  return a;
}

json to_json(const CriticalPoint& cp) {
  json j;
  j["location"] = to_json(cp.location);
  j["value"] = json_number(cp.value);
  j["morse_p"] = cp.morse_p;
  j["morse_q"] = cp.morse_q;
  j["site"] = std::string(to_string(cp.site));
  j["hessian_det"] = json_number(cp.hessian_det);
  j["min_abs_eigenvalue"] = json_number(cp.min_abs_eigenvalue);
  j["residual"] = json_number(cp.residual);
  if (cp.site == Site::boundary) {
    j["multiplier"] = json_number(cp.multiplier);
    j["gradient_norm"] = json_number(cp.gradient_norm);
  }
  j["constraint_value"] = json_number(cp.constraint_value);
  return j;
}

namespace {

json condition_json(const ConditionResult& c) {
  json j;
  j["status"] = std::string(to_string(c.status));
  json w = json::array();
  for (const auto& p : c.witnesses) w.push_back(to_json(p));
  j["witnesses"] = std::move(w);
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

json kind_json(const std::optional<DiscontinuityKind>& k) {
  return k ? json(std::string(to_string(*k))) : json("none");
}

}  // namespace

json to_json(const NondegeneracyReport& r) {
  json j;
  j["condition_a"] = condition_json(r.condition_a);
  j["condition_b"] = condition_json(r.condition_b);
  j["condition_c"] = condition_json(r.condition_c);
  j["condition_d"] = condition_json(r.condition_d);
  j["condition_e"] = condition_json(r.condition_e);
  j["fine_min_gap"] = json_number(r.fine_min_gap);
  json in = json::array();
  for (const auto& cp : r.interior) in.push_back(to_json(cp));
  json bd = json::array();
  for (const auto& cp : r.boundary) bd.push_back(to_json(cp));
  j["interior_critical_points"] = std::move(in);
  j["boundary_critical_points"] = std::move(bd);
  return j;
}

json to_json(const SingularityReport& r) {
  json j;
  j["h_star"] = json_number(r.h_star);
  j["predicted_order"] = r.predicted_order ? json(*r.predicted_order) : json(nullptr);
  j["predicted_kind"] = r.predicted_order ? kind_json(r.predicted_kind) : json(nullptr);
  j["predicted_amplitude"] = r.predicted_amplitude ? json_number(*r.predicted_amplitude) : json(nullptr);
  if (r.measured_order) j["measured_order"] = *r.measured_order;
  else if (r.smooth_to_max_tested) j["measured_order"] = "smooth_to_max_tested";
  else j["measured_order"] = nullptr;
  j["measured_kind"] = kind_json(r.measured_kind);
  j["verdict"] = r.inconclusive ? "inconclusive" : "conclusive";
  if (r.predicted_order) j["matches_prediction"] = r.matches_prediction();
  json coeffs;
  for (const auto& [name, value] : r.fit_coefficients) coeffs[name] = json_number(value);
  j["fit_coefficients"] = coeffs.is_null() ? json::object() : coeffs;
  j["residual"] = json_number(r.residual);
  j["max_order_tested"] = r.max_order_tested;
  j["noise_mult"] = json_number(r.noise_mult);
  j["half_width"] = json_number(r.half_width);
  json orders = json::array();
  for (const auto& od : r.orders) {
    json o;
    o["order"] = od.order;
    o["jump"] = json_number(od.jump);
    o["jump_noise"] = json_number(od.jump_noise);
    o["systematic"] = json_number(od.systematic);
    o["offset"] = json_number(od.offset);
    o["resolved"] = od.resolved;
    orders.push_back(std::move(o));
  }
  j["orders"] = std::move(orders);
  json fits = json::array();
  for (const auto& f : r.fits) {
    json o;
    o["model"] = f.model;
    o["order"] = f.order;
    o["degree"] = f.degree;
    o["chi2"] = json_number(f.chi2);
    o["dof"] = f.dof;
    o["acceptable"] = f.acceptable;
    o["significant"] = f.significant;
    json c = json::object();
    json sd = json::object();
    for (std::size_t i = 0; i < f.coefficients.size(); ++i) {
      c[f.coefficients[i].first] = json_number(f.coefficients[i].second);
      sd[f.coefficients[i].first] = json_number(f.coefficient_noise[i]);
    }
    o["coefficients"] = c;
    o["coefficient_noise"] = sd;
    fits.push_back(std::move(o));
  }
  j["fits"] = std::move(fits);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace levelvol
