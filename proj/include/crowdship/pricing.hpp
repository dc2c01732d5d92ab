#pragma once

#include <chrono>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "crowdship/geometry.hpp"
#include "crowdship/model.hpp"
#include "crowdship/probability.hpp"

namespace crowdship {

struct DualPrices {
  std::unordered_map<int, double> task_duals;    // pi_i >= 0
  std::unordered_map<int, double> driver_duals;  // mu_w >= 0

  double task_dual(int id) const {
    auto it = task_duals.find(id);
    return it == task_duals.end() ? 0.0 : it->second;
  }
  double driver_dual(int id) const {
    auto it = driver_duals.find(id);
    return it == driver_duals.end() ? 0.0 : it->second;
  }
};

// Update function for an extra bundle predictor: value added when extending a
// path ending at `from` with `task`. Must be non-negative. Extras are only
// usable through code; the benchmark generator leaves them empty.
using ExtraPredictorUpdate =
    std::function<double(const DriverSpec&, const Point& from, const TaskSpec& task)>;

struct PricingConfig {
  bool use_dominance = true;
  bool use_rc_pruning = true;
  bool use_detour_limit = true;
  int column_limit_per_driver = 100;
  bool enumeration_mode = false;
  double enumeration_threshold = 0.0;
  std::optional<std::set<int>> restrict_tasks;  // corridor restriction
  std::vector<ExtraPredictorUpdate> extra_updates;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// Partial bundle-path for one driver.
struct Label {
  int driver_id = 0;
  int depot_id = 0;
  std::vector<int> task_order;
  double used_capacity = 0.0;
  PredictorVector predictors;  // detour entry includes the initial depot detour
  double outsource_total = 0.0;
  std::vector<int> reachable;  // sorted ascending
  double dual_task_sum = 0.0;
  double reduced_cost = 0.0;

  Point last_location;  // task i_l, or the depot if the bundle is empty
  bool dominated = false;
  bool no_extend = false;  // search-internal: extensions cannot beat the threshold
  std::uint64_t creation_order = 0;
};

struct Column {
  int driver_id = 0;
  Bundle bundle;
  double compensation = 0.0;
  double acceptance_probability = 0.0;
  double expected_savings = 0.0;
  double reduced_cost_at_generation = 0.0;
};

std::vector<Label> init_labels(const Instance& instance, const DriverSpec& driver,
                               const DualPrices& duals, const PricingConfig& config);

Label extend(const Instance& instance, const Label& label, int task_id, const DualPrices& duals,
             const PricingConfig& config);

// Label dominance. Callers must only compare labels of the same driver and
// depot whose bundles end at the same task.
bool dominates(const Instance& instance, const Label& lp, const Label& lf);

// Route dominance for enumeration: same task set, strictly better reduced
// cost, superset of reachable tasks.
bool route_dominates(const Label& lp, const Label& lf);

// Greedy bound on how many reachable tasks can still be added.
int k_max(const Instance& instance, const Label& label);

// Upper bound on the reduced cost of any k-task extension, from predictor
// and dual extrema over the reachable set.
double rc_upper_bound(const Instance& instance, const Label& label, const DualPrices& duals,
                      int k, const PricingConfig& config);

// True when no extension can have reduced cost above `threshold` (0 in
// standard mode, LB-UB in enumeration mode).
bool can_prune(const Instance& instance, const Label& label, const DualPrices& duals,
               const PricingConfig& config, double threshold = 0.0);

// Detour ceiling for k-task extensions. +inf when duals vanish or
// extra predictors are present (the bound is specific to the detour/size
// model).
double detour_bound(const Instance& instance, const Label& label, const DualPrices& duals, int k,
                    const PricingConfig& config, double threshold = 0.0);

// Drops reachable tasks whose first-step detour already exceeds every
// k-extension ceiling.
Label trim_successors(const Instance& instance, const Label& label, const DualPrices& duals,
                      const PricingConfig& config, double threshold = 0.0);

// Label-setting search over one driver. Standard mode returns columns with
// positive reduced cost, at most column_limit_per_driver of them; enumeration
// mode returns every column at or above enumeration_threshold.
std::vector<Column> price_driver(const Instance& instance, const DriverSpec& driver,
                                 const DualPrices& duals, const PricingConfig& config);

}  // namespace crowdship
