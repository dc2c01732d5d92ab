#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crowdship/geometry.hpp"
#include "crowdship/model.hpp"
#include "crowdship/probability.hpp"
#include "crowdship/rng.hpp"
#include "helpers.hpp"

using namespace crowdship;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "crowdship_model_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// A solution with internally consistent offer metrics for the instance.
Solution consistent_solution(const Instance& inst, int driver_id, std::vector<int> tasks) {
  Offer o;
  o.driver_id = driver_id;
  o.bundle = {0, std::move(tasks)};
  double outsource = 0.0;
  for (int tid : o.bundle.task_order) outsource += inst.task(tid).outsource_cost;
  PredictorVector x;
  x.detour = bundle_detour(inst, inst.driver(driver_id), o.bundle);
  x.bundle_size = static_cast<double>(o.bundle.task_order.size());
  o.detour = x.detour;
  o.compensation = optimal_compensation(inst.driver(driver_id).behavior, x, outsource);
  o.acceptance_probability =
      acceptance_probability(inst.driver(driver_id).behavior, x, o.compensation);
  o.expected_savings = expected_savings(o.acceptance_probability, outsource, o.compensation);
  Solution sol;
  sol.objective = o.expected_savings;
  sol.offers.push_back(std::move(o));
  sol.status = SolveStatus::heuristic;
  return sol;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("format_real round-trips doubles exactly") {
  SplitMix64 rng(31);
  for (int i = 0; i < 10000; ++i) {
    double v = rng.uniform_real(-1e6, 1e6) * std::pow(10.0, rng.uniform_int(-12, 12));
    CHECK(std::stod(format_real(v)) == v);
  }
  CHECK(std::stod(format_real(0.1)) == 0.1);
}

TEST_CASE("instance save/load/save is byte identical") {
  Instance inst = testutil::make_instance(41, 6, 3);
  inst.seed = 12345;
  fs::path a = tmp_file("round_a.txt"), b = tmp_file("round_b.txt");
  save_instance(inst, a.string());
  Instance loaded = load_instance(a.string());
  save_instance(loaded, b.string());
  CHECK(slurp(a) == slurp(b));
  CHECK(loaded.name == inst.name);
  CHECK(loaded.seed == inst.seed);
  CHECK(loaded.tasks.size() == inst.tasks.size());
  CHECK(loaded.drivers.size() == inst.drivers.size());
  CHECK(loaded.task(3).load == inst.task(3).load);
  CHECK(loaded.driver(2).behavior.intercept == inst.driver(2).behavior.intercept);
}

TEST_CASE("solution save/load/save is byte identical") {
  Instance inst = testutil::make_instance(42, 5, 2);
  Solution sol = consistent_solution(inst, 1, {1, 3});
  sol.bound = sol.objective + 0.25;
  fs::path a = tmp_file("sol_a.txt"), b = tmp_file("sol_b.txt");
  save_solution(sol, a.string());
  Solution loaded = load_solution(a.string());
  save_solution(loaded, b.string());
  CHECK(slurp(a) == slurp(b));
  CHECK(loaded.objective == sol.objective);
  CHECK(loaded.bound == sol.bound);
  CHECK(loaded.offers.size() == 1);
  CHECK(loaded.offers[0].bundle.task_order == std::vector<int>{1, 3});
}

TEST_CASE("instance parser rejects malformed files") {
  fs::path p = tmp_file("bad.txt");
  spit(p, "WRONG-HEADER\n");
  CHECK_THROWS_AS(load_instance(p.string()), ParseError);
  spit(p, "CROWDSHIP-INSTANCE v1\nNAME x\nSEED none\nDEPOTS 1\n0 0 0 ALL\nTASKS 1\n1 oops 0 10 4.95\n");
  CHECK_THROWS_AS(load_instance(p.string()), ParseError);
  spit(p, "CROWDSHIP-INSTANCE v1\nNAME x\nSEED abc\n");
  CHECK_THROWS_AS(load_instance(p.string()), ParseError);
  CHECK_THROWS_AS(load_instance("/nonexistent/nowhere.txt"), IoError);
}

TEST_CASE("finalize enforces model invariants") {
  auto base = [] { return testutil::make_instance(43, 4, 2); };

  Instance dup = base();
  dup.tasks[1].id = dup.tasks[0].id;
  CHECK_THROWS_AS(dup.finalize(), ValidationError);

  Instance load0 = base();
  load0.tasks[0].load = 0.0;
  CHECK_THROWS_AS(load0.finalize(), ValidationError);

  Instance uncovered = base();
  uncovered.depots[0].servable_tasks.erase(2);
  CHECK_THROWS_AS(uncovered.finalize(), ValidationError);

  Instance badgamma = base();
  badgamma.drivers[0].behavior.compensation_coeff = 0.0;
  CHECK_THROWS_AS(badgamma.finalize(), ValidationError);

  Instance badbeta = base();
  badbeta.drivers[0].behavior.detour_coeff = 0.5;
  CHECK_THROWS_AS(badbeta.finalize(), ValidationError);

  Instance ghost = base();
  ghost.depots[0].servable_tasks.insert(99);
  CHECK_THROWS_AS(ghost.finalize(), ValidationError);
}

TEST_CASE("validate_solution accepts a consistent solution") {
  Instance inst = testutil::make_instance(44, 5, 2);
  Solution sol = consistent_solution(inst, 1, {2, 4});
  CHECK(validate_solution(inst, sol).ok());
}

TEST_CASE("validate_solution reports each violation") {
  Instance inst = testutil::make_instance(45, 5, 2);

  Solution sol = consistent_solution(inst, 1, {1});
  sol.objective += 1.0;  // objective no longer the sum of offers
  auto rep = validate_solution(inst, sol);
  CHECK(!rep.ok());

  Solution twice = consistent_solution(inst, 1, {1});
  twice.offers.push_back(consistent_solution(inst, 2, {1}).offers[0]);
  twice.objective += twice.offers[1].expected_savings;
  rep = validate_solution(inst, twice);
  bool found = false;
  for (const auto& v : rep.violations) found = found || v.find("multiple offers") != std::string::npos;
  CHECK(found);

  Solution heavy = consistent_solution(inst, 1, {1, 2, 3, 4, 5});
  rep = validate_solution(inst, heavy);
  found = false;
  for (const auto& v : rep.violations) found = found || v.find("capacity") != std::string::npos;
  CHECK(found);

  Solution wrong_p = consistent_solution(inst, 1, {2});
  wrong_p.offers[0].acceptance_probability += 0.1;
  rep = validate_solution(inst, wrong_p);
  found = false;
  for (const auto& v : rep.violations) found = found || v.find("probability") != std::string::npos;
  CHECK(found);
}

TEST_CASE("solve status strings round trip") {
  for (SolveStatus s : {SolveStatus::optimal, SolveStatus::heuristic, SolveStatus::time_limit})
    CHECK(solve_status_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(solve_status_from_string("bogus"), ParseError);
}

}  // TEST_SUITE
