#pragma once

#include "crowdship/model.hpp"

namespace crowdship {

struct OracleLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exhaustive reference optimum: enumerates every feasible ordered bundle for
// every driver and maximizes total expected savings over disjoint assignments
// by dynamic programming on task subsets. Refuses instances with more than
// 8 tasks or 3 drivers.
Solution oracle_solve(const Instance& instance);

}  // namespace crowdship
