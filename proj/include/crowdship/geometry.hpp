#pragma once

#include <set>

#include "crowdship/model.hpp"

namespace crowdship {

struct PathContext {
  int driver_id = 0;
  int depot_id = 0;
  Point last_location;  // last task delivered, or the depot if none yet
};

double distance(const Point& a, const Point& b);

// Extra travel for visiting the depot on the way from origin to destination.
double initial_detour(const DriverSpec& driver, const DepotSpec& depot);

// Additional detour when appending `task` after the context's last location.
// Non-negative by the triangle inequality.
double detour_increment(const PathContext& ctx, const TaskSpec& task, const DriverSpec& driver);

// Length of the path origin -> depot -> tasks (in order) -> destination,
// minus the direct origin-destination distance.
double bundle_detour(const Instance& instance, const DriverSpec& driver, const Bundle& bundle);

struct NoFeasibleDepotError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateDriverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Detour-minimizing depot able to serve all tasks; ties broken by lowest id.
int best_depot(const Instance& instance, const DriverSpec& driver, const std::set<int>& tasks);

// Tasks whose location, together with at least one serving depot, lies within
// half-angle theta of the driver's origin->destination axis. Locations that
// coincide with the origin count as angle zero.
std::set<int> corridor_tasks(const Instance& instance, const DriverSpec& driver, double theta_degrees);

}  // namespace crowdship
