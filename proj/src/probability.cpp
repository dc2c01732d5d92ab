#include "crowdship/probability.hpp"

#include <cmath>

namespace crowdship {

double lambert_w0(double x) {
  if (x < 0.0) throw DomainError("lambert_w0: negative argument");
  if (x == 0.0) return 0.0;
  const double e = std::exp(1.0);
  double w = x < e ? std::log1p(x) : std::log(x) - std::log(std::log(x));
  for (int it = 0; it < 100; ++it) {
    double ew = std::exp(w);
    double f = w * ew - x;
    if (std::abs(f) <= 1e-13 * std::max(1.0, x)) break;
    // Halley step
    double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
    w -= f / denom;
  }
  return w;
}

double lambert_w_of_exp(double z) {
  if (z < 1.0) return lambert_w0(std::exp(z));
  // Newton on f(w) = w + ln w - z; w in [1, z] here, monotone and convex.
  double w = std::max(z - std::log(std::max(z, 1.0)), 1e-9);
  for (int it = 0; it < 100; ++it) {
    double f = w + std::log(w) - z;
    if (std::abs(f) <= 1e-12) break;
    w -= f / (1.0 + 1.0 / w);
    if (w <= 0.0) w = 1e-12;
  }
  return w;
}

double bundle_score(const BehaviorCoefficients& coeffs, const PredictorVector& x) {
  double s = coeffs.intercept + coeffs.detour_coeff * x.detour + coeffs.size_coeff * x.bundle_size;
  for (std::size_t i = 0; i < x.extras.size(); ++i) {
    double c = i < coeffs.extra_bundle_coeffs.size() ? coeffs.extra_bundle_coeffs[i] : 0.0;
    s += c * x.extras[i];
  }
  return s + coeffs.driver_term();
}

double acceptance_probability(const BehaviorCoefficients& coeffs, const PredictorVector& x,
                              double compensation) {
  double t = bundle_score(coeffs, x) + coeffs.compensation_coeff * compensation;
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

double optimal_compensation(const BehaviorCoefficients& coeffs, const PredictorVector& x,
                            double outsource_total) {
  if (!(outsource_total > 0.0)) throw DomainError("optimal_compensation: outsource_total must be > 0");
  double gamma = coeffs.compensation_coeff;
  double z = bundle_score(coeffs, x) + gamma * outsource_total - 1.0;
  double w = lambert_w_of_exp(z);
  return (gamma * outsource_total - 1.0 - w) / gamma;
}

double expected_savings(double probability, double outsource_total, double compensation) {
  return probability * (outsource_total - compensation);
}

double reduced_cost(const BehaviorCoefficients& coeffs, const PredictorVector& x,
                    double outsource_total, double dual_task_sum, double dual_driver) {
  double gamma = coeffs.compensation_coeff;
  double z = bundle_score(coeffs, x) + gamma * outsource_total - 1.0;
  return lambert_w_of_exp(z) / gamma - dual_task_sum - dual_driver;
}

}  // namespace crowdship
