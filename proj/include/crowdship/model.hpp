#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace crowdship {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct TaskSpec {
  int id = 0;
  Point location;
  double load = 0.0;
  double outsource_cost = 0.0;
};

struct DepotSpec {
  int id = 0;
  Point location;
  std::set<int> servable_tasks;
};

struct BehaviorCoefficients {
  double intercept = 0.0;            // alpha
  double detour_coeff = 0.0;         // beta1 <= 0
  double size_coeff = 0.0;           // beta2 <= 0
  double compensation_coeff = 1.0;   // gamma > 0
  std::vector<double> extra_bundle_coeffs;  // further bundle predictors
  std::vector<double> driver_coeffs;        // driver-only predictors
  std::vector<double> driver_values;

  // Contribution of driver-only predictors, constant per driver.
  double driver_term() const {
    double s = 0.0;
    for (std::size_t i = 0; i < driver_coeffs.size(); ++i) s += driver_coeffs[i] * driver_values[i];
    return s;
  }
};

struct DriverSpec {
  int id = 0;
  Point origin;
  Point destination;
  double capacity = 0.0;
  BehaviorCoefficients behavior;
  std::optional<int> class_tag;  // reporting only
};

struct Instance {
  std::vector<TaskSpec> tasks;
  std::vector<DepotSpec> depots;
  std::vector<DriverSpec> drivers;
  std::string name;
  std::optional<std::int64_t> seed;

  const TaskSpec& task(int id) const;
  const DepotSpec& depot(int id) const;
  const DriverSpec& driver(int id) const;
  bool has_task(int id) const { return task_index_.count(id) > 0; }

  // Builds id lookup tables and checks all invariants. Must be called after
  // construction; load_instance and the generator do this for you.
  void finalize();

 private:
  std::unordered_map<int, std::size_t> task_index_;
  std::unordered_map<int, std::size_t> depot_index_;
  std::unordered_map<int, std::size_t> driver_index_;
};

struct Bundle {
  int depot_id = 0;
  std::vector<int> task_order;
};

struct Offer {
  int driver_id = 0;
  Bundle bundle;
  double compensation = 0.0;
  double acceptance_probability = 0.0;
  double expected_savings = 0.0;
  double detour = 0.0;
};

enum class SolveStatus { optimal, heuristic, time_limit };

std::string to_string(SolveStatus s);
SolveStatus solve_status_from_string(const std::string& s);

struct Solution {
  std::vector<Offer> offers;
  double objective = 0.0;
  std::optional<double> bound;
  SolveStatus status = SolveStatus::heuristic;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Instance load_instance(const std::string& path);
void save_instance(const Instance& instance, const std::string& path);

Solution load_solution(const std::string& path);
void save_solution(const Solution& solution, const std::string& path);

// One finding per violated constraint; empty report means feasible.
struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_solution(const Instance& instance, const Solution& solution);

// Decimal form with 17 significant digits, enough to round-trip any double
// exactly. Used by all file writers so that save/load is the identity.
std::string format_real(double v);

}  // namespace crowdship
