#include "crowdship/geometry.hpp"

#include <cmath>
#include <limits>

namespace crowdship {

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double initial_detour(const DriverSpec& driver, const DepotSpec& depot) {
  double d = distance(driver.origin, depot.location) + distance(depot.location, driver.destination) -
             distance(driver.origin, driver.destination);
  return d < 0.0 ? 0.0 : d;  // guard against rounding below zero
}

double detour_increment(const PathContext& ctx, const TaskSpec& task, const DriverSpec& driver) {
  double d = distance(ctx.last_location, task.location) +
             distance(task.location, driver.destination) -
             distance(ctx.last_location, driver.destination);
  return d < 0.0 ? 0.0 : d;
}

double bundle_detour(const Instance& instance, const DriverSpec& driver, const Bundle& bundle) {
  const DepotSpec& depot = instance.depot(bundle.depot_id);
  double len = distance(driver.origin, depot.location);
  Point prev = depot.location;
  for (int tid : bundle.task_order) {
    const Point& loc = instance.task(tid).location;
    len += distance(prev, loc);
    prev = loc;
  }
  len += distance(prev, driver.destination);
  double d = len - distance(driver.origin, driver.destination);
  return d < 0.0 ? 0.0 : d;
}

int best_depot(const Instance& instance, const DriverSpec& driver, const std::set<int>& tasks) {
  int best = -1;
  double best_detour = std::numeric_limits<double>::infinity();
  for (const DepotSpec& d : instance.depots) {
    bool serves_all = true;
    for (int tid : tasks)
      if (d.servable_tasks.find(tid) == d.servable_tasks.end()) {
        serves_all = false;
        break;
      }
    if (!serves_all) continue;
    double det = initial_detour(driver, d);
    if (det < best_detour || (det == best_detour && (best < 0 || d.id < best))) {
      best_detour = det;
      best = d.id;
    }
  }
  if (best < 0) throw NoFeasibleDepotError("no depot serves all requested tasks");
  return best;
}

namespace {

// Smaller angle between v and (p - origin), in radians; 0 when p == origin.
double angle_from_axis(const Point& origin, const Point& axis_end, const Point& p) {
  double vx = axis_end.x - origin.x, vy = axis_end.y - origin.y;
  double ux = p.x - origin.x, uy = p.y - origin.y;
  if (ux == 0.0 && uy == 0.0) return 0.0;
  double cross = vx * uy - vy * ux;
  double dot = vx * ux + vy * uy;
  return std::abs(std::atan2(cross, dot));
}

}  // namespace

std::set<int> corridor_tasks(const Instance& instance, const DriverSpec& driver,
                             double theta_degrees) {
  if (driver.origin.x == driver.destination.x && driver.origin.y == driver.destination.y)
    throw DegenerateDriverError("driver " + std::to_string(driver.id) +
                                ": corridor undefined for coincident origin and destination");
  double theta = theta_degrees * M_PI / 180.0;
  std::set<int> result;
  if (theta_degrees >= 180.0) {
    // Entire task space: every task with at least one serving depot.
    for (const TaskSpec& t : instance.tasks)
      for (const DepotSpec& d : instance.depots)
        if (d.servable_tasks.count(t.id)) {
          result.insert(t.id);
          break;
        }
    return result;
  }
  for (const TaskSpec& t : instance.tasks) {
    if (angle_from_axis(driver.origin, driver.destination, t.location) >= theta) continue;
    for (const DepotSpec& d : instance.depots) {
      if (d.servable_tasks.find(t.id) == d.servable_tasks.end()) continue;
      if (angle_from_axis(driver.origin, driver.destination, d.location) < theta) {
        result.insert(t.id);
        break;
      }
    }
  }
  return result;
}

}  // namespace crowdship
