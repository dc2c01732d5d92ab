#pragma once

// Shared builders for the test suite. Everything here is deliberately
// independent of the solver internals: geometry and probability values are
// recomputed from first principles where a test needs an oracle.

#include <cmath>
#include <vector>

#include "crowdship/bench.hpp"
#include "crowdship/model.hpp"
#include "crowdship/probability.hpp"
#include "crowdship/rng.hpp"

namespace testutil {

using namespace crowdship;

// Small random instance: one depot at the origin serving everything, drivers
// starting at the depot with uniform destinations, Table-2 style coefficients.
inline Instance make_instance(std::uint64_t seed, int n_tasks, int n_drivers,
                              double capacity = 60.0, double load_lo = 10.0,
                              double load_hi = 30.0) {
  SplitMix64 rng(mix64(seed ^ 0x7E57ULL));
  Instance inst;
  inst.name = "t" + std::to_string(seed);

  DepotSpec depot;
  depot.id = 0;
  depot.location = {0.0, 0.0};
  for (int i = 1; i <= n_tasks; ++i) {
    TaskSpec t;
    t.id = i;
    t.location = {rng.uniform_real(-3.0, 3.0), rng.uniform_real(-3.0, 3.0)};
    t.load = static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(load_lo),
                                                 static_cast<std::int64_t>(load_hi)));
    t.outsource_cost = 4.95;
    inst.tasks.push_back(t);
    depot.servable_tasks.insert(i);
  }
  inst.depots.push_back(std::move(depot));

  for (int i = 1; i <= n_drivers; ++i) {
    DriverSpec w;
    w.id = i;
    w.origin = {0.0, 0.0};
    w.destination = {rng.uniform_real(-3.0, 3.0), rng.uniform_real(-3.0, 3.0)};
    w.capacity = capacity;
    int tag = static_cast<int>(rng.uniform_int(1, 3));
    w.behavior = class_coefficients(tag);
    w.class_tag = tag;
    inst.drivers.push_back(std::move(w));
  }
  inst.finalize();
  return inst;
}

// Tiny instances for oracle comparison: <= 7 tasks, <= 2 drivers, and loads /
// capacity chosen so no bundle can hold more than 3 tasks.
inline Instance make_tiny_instance(std::uint64_t seed) {
  SplitMix64 rng(mix64(seed * 2654435761ULL + 17));
  int n_tasks = 4 + static_cast<int>(rng.uniform_int(0, 3));    // 4..7
  int n_drivers = 1 + static_cast<int>(rng.uniform_int(0, 1));  // 1..2
  return make_instance(seed * 31 + 7, n_tasks, n_drivers, /*capacity=*/75.0,
                       /*load_lo=*/20.0, /*load_hi=*/30.0);
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Grid-search oracle: max over C in [0, Cbar] (step `step`) of P(C)*(Cbar-C).
// The exponent moves by gamma*step per grid point, so the exponential is
// updated multiplicatively and refreshed periodically against drift.
inline double grid_best_savings(const crowdship::BehaviorCoefficients& b,
                                const crowdship::PredictorVector& x, double cbar,
                                double step = 1e-4) {
  double t0 = crowdship::bundle_score(b, x);
  double factor = std::exp(b.compensation_coeff * step);
  double e = std::exp(t0);
  double best = 0.0;
  long n = static_cast<long>(cbar / step);
  for (long k = 0; k <= n; ++k) {
    if (k % 8192 == 0) e = std::exp(t0 + b.compensation_coeff * k * step);
    double c = k * step;
    double p = e / (1.0 + e);
    double s = p * (cbar - c);
    if (s > best) best = s;
    e *= factor;
  }
  return best;
}

}  // namespace testutil
