#include <doctest.h>

#include <cmath>
#include <set>

#include "crowdship/geometry.hpp"
#include "crowdship/rng.hpp"
#include "helpers.hpp"

using namespace crowdship;

namespace {

DriverSpec axis_driver() {
  DriverSpec w;
  w.id = 1;
  w.origin = {0.0, 0.0};
  w.destination = {4.0, 0.0};
  w.capacity = 100.0;
  w.behavior.compensation_coeff = 1.0;
  return w;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("distance is the Euclidean norm") {
  CHECK(distance({0.0, 0.0}, {3.0, 4.0}) == 5.0);
  CHECK(distance({1.0, 1.0}, {1.0, 1.0}) == 0.0);
}

TEST_CASE("initial_detour arithmetic oracle") {
  DriverSpec w = axis_driver();
  DepotSpec d;
  d.id = 0;
  d.location = {2.0, 2.0};
  // 0,0 -> 2,2 -> 4,0 is two sides of sqrt(8) against a direct leg of 4
  CHECK(testutil::close(initial_detour(w, d), 2.0 * std::sqrt(8.0) - 4.0, 1e-12));
  d.location = {2.0, 0.0};  // on the axis: no detour
  CHECK(initial_detour(w, d) == 0.0);
}

TEST_CASE("detour_increment arithmetic oracle and non-negativity") {
  DriverSpec w = axis_driver();
  TaskSpec t;
  t.id = 1;
  t.location = {2.0, 1.0};
  PathContext ctx{1, 0, {0.0, 0.0}};
  CHECK(testutil::close(detour_increment(ctx, t, w), 2.0 * std::sqrt(5.0) - 4.0, 1e-12));

  SplitMix64 rng(21);
  for (int i = 0; i < 1000; ++i) {
    PathContext c{1, 0, {rng.uniform_real(-5, 5), rng.uniform_real(-5, 5)}};
    TaskSpec task;
    task.location = {rng.uniform_real(-5, 5), rng.uniform_real(-5, 5)};
    DriverSpec d = axis_driver();
    d.destination = {rng.uniform_real(-5, 5), rng.uniform_real(-5, 5)};
    CHECK(detour_increment(c, task, d) >= 0.0);
  }
}

TEST_CASE("bundle_detour telescopes over initial detour plus increments") {
  SplitMix64 rng(22);
  for (int trial = 0; trial < 10000; ++trial) {
    Instance inst = testutil::make_instance(trial + 1, 5, 1, /*capacity=*/1e9);
    const DriverSpec& w = inst.drivers[0];

    std::vector<int> ids = {1, 2, 3, 4, 5};
    rng.shuffle(ids);
    int len = 1 + static_cast<int>(rng.uniform_int(0, 4));
    Bundle b{0, std::vector<int>(ids.begin(), ids.begin() + len)};

    double acc = initial_detour(w, inst.depot(0));
    Point last = inst.depot(0).location;
    for (int tid : b.task_order) {
      PathContext ctx{w.id, 0, last};
      acc += detour_increment(ctx, inst.task(tid), w);
      last = inst.task(tid).location;
    }
    CHECK(testutil::close(bundle_detour(inst, w, b), acc, 1e-12));
  }
}

TEST_CASE("best_depot picks the lowest detour, ties by id") {
  Instance inst = testutil::make_instance(5, 3, 1, 1e9);
  // add a second depot further out plus an equidistant twin with a higher id
  DepotSpec far;
  far.id = 7;
  far.location = {50.0, 50.0};
  far.servable_tasks = inst.depots[0].servable_tasks;
  DepotSpec twin;
  twin.id = 9;
  twin.location = inst.depots[0].location;
  twin.servable_tasks = inst.depots[0].servable_tasks;
  inst.depots.push_back(far);
  inst.depots.push_back(twin);
  inst.finalize();

  CHECK(best_depot(inst, inst.drivers[0], {1, 2}) == 0);

  // only the far depot serves task 3
  inst.depots[0].servable_tasks.erase(3);
  inst.depots[2].servable_tasks.erase(3);
  inst.finalize();
  CHECK(best_depot(inst, inst.drivers[0], {3}) == 7);

  inst.depots[1].servable_tasks.erase(3);
  CHECK_THROWS_AS(best_depot(inst, inst.drivers[0], {3}), NoFeasibleDepotError);
}

TEST_CASE("corridor membership example at 36 degrees") {
  Instance inst;
  inst.tasks.push_back({1, {2.0, 1.0}, 10.0, 4.95});  // ~26.6 degrees off axis
  inst.tasks.push_back({2, {1.0, 3.0}, 10.0, 4.95});  // ~71.6 degrees off axis
  DepotSpec d;
  d.id = 0;
  d.location = {1.0, 0.0};  // on the axis
  d.servable_tasks = {1, 2};
  inst.depots.push_back(d);
  DriverSpec w = axis_driver();
  inst.drivers.push_back(w);
  inst.finalize();

  std::set<int> in = corridor_tasks(inst, inst.drivers[0], 36.0);
  CHECK(in.count(1) == 1);
  CHECK(in.count(2) == 0);
}

TEST_CASE("corridor at 180 degrees is every servable task") {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    Instance inst = testutil::make_instance(s, 6, 1);
    std::set<int> all = corridor_tasks(inst, inst.drivers[0], 180.0);
    CHECK(all.size() == inst.tasks.size());
  }
}

TEST_CASE("corridor grows monotonically with theta") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    Instance inst = testutil::make_instance(trial + 100, 8, 1);
    double t1 = rng.uniform_real(0.0, 180.0);
    double t2 = rng.uniform_real(0.0, 180.0);
    if (t1 > t2) std::swap(t1, t2);
    std::set<int> small = corridor_tasks(inst, inst.drivers[0], t1);
    std::set<int> big = corridor_tasks(inst, inst.drivers[0], t2);
    for (int tid : small) CHECK(big.count(tid) == 1);
  }
}

TEST_CASE("corridor rejects a degenerate driver") {
  Instance inst = testutil::make_instance(3, 3, 1);
  inst.drivers[0].destination = inst.drivers[0].origin;
  CHECK_THROWS_AS(corridor_tasks(inst, inst.drivers[0], 36.0), DegenerateDriverError);
}

}  // TEST_SUITE
