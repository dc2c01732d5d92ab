#pragma once

#include <vector>

#include "crowdship/model.hpp"

namespace crowdship {

// Bundle-dependent predictor values: detour, bundle size, optional extras.
// All entries are non-negative and additive along path extensions.
struct PredictorVector {
  double detour = 0.0;
  double bundle_size = 0.0;
  std::vector<double> extras;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Principal branch of the Lambert W function for x >= 0.
// |w e^w - x| <= 1e-12 * max(1, x).
double lambert_w0(double x);

// W(e^z) without forming e^z; solves w + ln w = z directly for z >= 1,
// so arguments far beyond the overflow threshold of exp are fine.
double lambert_w_of_exp(double z);

// Linear predictor excluding the compensation term:
// alpha + B.X + D.Y (detour, bundle size and extras weighted by coefficients).
double bundle_score(const BehaviorCoefficients& coeffs, const PredictorVector& x);

// Logistic acceptance probability, Eq-(4)-style with concrete predictors.
double acceptance_probability(const BehaviorCoefficients& coeffs, const PredictorVector& x,
                              double compensation);

// Closed-form maximizer of P(C) * (outsource_total - C). May be negative for
// tiny outsource totals; such offers are worthless (a driver never accepts an
// uncompensated bundle) and callers must not emit them.
double optimal_compensation(const BehaviorCoefficients& coeffs, const PredictorVector& x,
                            double outsource_total);

double expected_savings(double probability, double outsource_total, double compensation);

// Closed-form reduced cost of a bundle priced at its optimal compensation:
// W(e^{alpha + B.X + D.Y + gamma*Cbar - 1}) / gamma - sum(pi) - mu.
double reduced_cost(const BehaviorCoefficients& coeffs, const PredictorVector& x,
                    double outsource_total, double dual_task_sum, double dual_driver);

}  // namespace crowdship
