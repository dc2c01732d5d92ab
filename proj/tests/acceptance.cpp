// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria with documented runtime budgets are wall-clocked here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crowdship/bench.hpp"
#include "crowdship/geometry.hpp"
#include "crowdship/model.hpp"
#include "crowdship/oracle.hpp"
#include "crowdship/orchestrator.hpp"
#include "crowdship/pricing.hpp"
#include "crowdship/probability.hpp"
#include "crowdship/rng.hpp"
#include "helpers.hpp"

using namespace crowdship;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct SandwichLedger {
  bool ok = true;
  int checked = 0;

  // every solved report with a CG bound must satisfy LB <= UB and the gap formula
  void check(const RunReport& rep) {
    if (!rep.upper_bound) return;
    ++checked;
    double ub = *rep.upper_bound;
    if (rep.lower_bound > ub + 1e-6) ok = false;
    if (!rep.gap_h || std::abs(*rep.gap_h - (ub - rep.lower_bound) / ub) > 1e-9) ok = false;
  }
  void check_with_opt(const RunReport& rep, double opt) {
    check(rep);
    if (rep.upper_bound && opt > *rep.upper_bound + 1e-6) ok = false;
    if (rep.lower_bound > opt + 1e-6) ok = false;
  }
};

SandwichLedger g_sandwich;

BehaviorCoefficients draw_coeffs(SplitMix64& rng) {
  BehaviorCoefficients b;
  b.intercept = rng.uniform_real(-6.0, -3.0);
  b.detour_coeff = rng.uniform_real(-3.0, -1.0);
  b.size_coeff = rng.uniform_real(-4.0, -2.0);
  b.compensation_coeff = rng.uniform_real(1.0, 3.0);
  return b;
}

PredictorVector draw_predictors(SplitMix64& rng) {
  PredictorVector x;
  x.detour = rng.uniform_real(0.0, 5.0);
  x.bundle_size = static_cast<double>(rng.uniform_int(1, 7));
  return x;
}

// --- criterion 1: closed-form compensation vs grid oracle ---
bool criterion1() {
  Clock::time_point t0 = Clock::now();
  SplitMix64 rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    BehaviorCoefficients b = draw_coeffs(rng);
    PredictorVector x = draw_predictors(rng);
    double cbar = rng.uniform_real(4.95, 34.65);
    double cs = optimal_compensation(b, x, cbar);
    double closed = expected_savings(acceptance_probability(b, x, cs), cbar, cs);
    worst = std::max(worst, std::abs(closed - testutil::grid_best_savings(b, x, cbar)));
  }
  return worst <= 1e-3 && seconds_since(t0) < 10.0;
}

// --- criterion 2: reduced-cost identity, including overflow-safe exponents ---
bool criterion2() {
  SplitMix64 rng(102);
  double worst = 0.0, max_exponent = 0.0;
  for (int i = 0; i < 1000; ++i) {
    BehaviorCoefficients b = draw_coeffs(rng);
    PredictorVector x = draw_predictors(rng);
    // last fifth of the draws pushes the exponent up to ~1e3
    double cbar = i < 800 ? rng.uniform_real(4.95, 34.65) : rng.uniform_real(100.0, 400.0);
    double pi = rng.uniform_real(0.0, 2.0), mu = rng.uniform_real(0.0, 1.0);
    max_exponent = std::max(max_exponent,
                            bundle_score(b, x) + b.compensation_coeff * cbar - 1.0);

    double closed = reduced_cost(b, x, cbar, pi, mu);
    double cs = optimal_compensation(b, x, cbar);
    double p = acceptance_probability(b, x, cs);
    worst = std::max(worst, std::abs(closed - (p * (cbar - cs) - pi - mu)));
  }
  return worst <= 1e-9 && max_exponent >= 1e3;
}

// --- criterion 3 (+5 bookkeeping): exactness on 50 tiny instances ---
bool criterion3(std::vector<Instance>& tiny, std::vector<double>& opts,
                std::vector<RunReport>& edd_reports) {
  Clock::time_point t0 = Clock::now();
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    tiny.push_back(testutil::make_tiny_instance(seed));
    const Instance& inst = tiny.back();
    double opt = oracle_solve(inst).objective;
    opts.push_back(opt);

    VariantConfig c;
    c.variant = Variant::e_dd;
    RunReport edd = run_variant(inst, c);
    c.variant = Variant::e_ddc;
    RunReport eddc = run_variant(inst, c);
    g_sandwich.check_with_opt(edd, opt);
    g_sandwich.check_with_opt(eddc, opt);
    ok = ok && std::abs(edd.solution.objective - opt) <= 1e-6 &&
         std::abs(eddc.solution.objective - opt) <= 1e-6;
    edd_reports.push_back(std::move(edd));
  }
  return ok && seconds_since(t0) < 60.0;
}

// Exact reference built without the search accelerations: full enumeration at
// threshold -inf followed by the restricted MILP.
double exact_by_enumeration(const Instance& inst, bool rc_pruning, bool detour_limit) {
  PricingConfig pc;
  pc.use_dominance = false;
  pc.use_rc_pruning = rc_pruning;
  pc.use_detour_limit = detour_limit;
  pc.enumeration_mode = true;
  pc.enumeration_threshold = -std::numeric_limits<double>::infinity();
  DualPrices zero;
  std::vector<Column> pool;
  for (const DriverSpec& w : inst.drivers)
    for (Column& c : price_driver(inst, w, zero, pc)) pool.push_back(std::move(c));
  return milp_heuristic(inst, pool, 600.0).objective;
}

// --- criterion 4: pruning toggles are lossless ---
bool criterion4(const std::vector<Instance>& tiny, const std::vector<RunReport>& edd_reports) {
  bool ok = true;
  for (std::size_t i = 0; i < tiny.size(); ++i) {
    double ref = exact_by_enumeration(tiny[i], false, false);
    ok = ok && std::abs(edd_reports[i].solution.objective - ref) <= 1e-6;
    ok = ok && std::abs(exact_by_enumeration(tiny[i], true, false) - ref) <= 1e-6;
    ok = ok && std::abs(exact_by_enumeration(tiny[i], false, true) - ref) <= 1e-6;
    ok = ok && std::abs(exact_by_enumeration(tiny[i], true, true) - ref) <= 1e-6;
  }

  // 10^4 randomized can_prune=true labels admit no above-threshold extension
  SplitMix64 rng(104);
  int pruned_labels = 0;
  bool safe = true;
  std::function<void(const Instance&, const Label&, const DualPrices&, const PricingConfig&)>
      walk = [&](const Instance& inst, const Label& l, const DualPrices& duals,
                 const PricingConfig& cfg) {
        if (!l.task_order.empty() && l.reduced_cost > 1e-9) safe = false;
        for (int tid : l.reachable) walk(inst, extend(inst, l, tid, duals, cfg), duals, cfg);
      };
  while (pruned_labels < 10000) {
    Instance inst = testutil::make_tiny_instance(rng.next() % 100000);
    DualPrices duals;
    for (const TaskSpec& t : inst.tasks) duals.task_duals[t.id] = rng.uniform_real(0.0, 2.0);
    for (const DriverSpec& w : inst.drivers) duals.driver_duals[w.id] = rng.uniform_real(0.0, 1.0);
    PricingConfig cfg;
    for (const DriverSpec& w : inst.drivers)
      for (Label& l0 : init_labels(inst, w, duals, cfg)) {
        int steps = static_cast<int>(rng.uniform_int(0, 2));
        Label l = l0;
        for (int s = 0; s < steps && !l.reachable.empty(); ++s)
          l = extend(inst, l, l.reachable[rng.uniform_int(0, static_cast<std::int64_t>(
                                                                 l.reachable.size()) - 1)],
                     duals, cfg);
        if (!can_prune(inst, l, duals, cfg, 0.0)) continue;
        ++pruned_labels;
        for (int tid : l.reachable) walk(inst, extend(inst, l, tid, duals, cfg), duals, cfg);
        if (pruned_labels >= 10000) break;
      }
  }
  return ok && safe;
}

// --- criteria 6 and 7: regenerated desk-scale slices ---
bool criterion6() {
  Clock::time_point t0 = Clock::now();
  GeneratorConfig gc;  // default library settings, regenerated with seed 0
  double gap_sum_dd = 0.0, gap_sum_ddc = 0.0;
  int n = 0;
  for (int base = 0; base < 10; ++base)
    for (int pattern = 3; pattern < 8; ++pattern) {
      Instance inst = generate_instance(gc, base, pattern, 30, 0.5);
      VariantConfig c;
      c.variant = Variant::h_dd;
      RunReport dd = run_variant(inst, c);
      c.variant = Variant::h_ddc;
      RunReport ddc = run_variant(inst, c);
      g_sandwich.check(dd);
      g_sandwich.check(ddc);
      if (!dd.gap_h || !ddc.gap_h) return false;
      gap_sum_dd += *dd.gap_h;
      gap_sum_ddc += *ddc.gap_h;
      ++n;
    }
  return gap_sum_dd / n <= 0.05 && gap_sum_ddc / n <= 0.05 && seconds_since(t0) < 300.0;
}

bool criterion7() {
  Clock::time_point t0 = Clock::now();
  GeneratorConfig gc;
  double gap_sum = 0.0;
  int n = 0;
  bool never_better = true;
  for (int base = 0; base < 10; ++base)
    for (int pattern = 3; pattern < 8; ++pattern) {
      Instance inst = generate_instance(gc, base, pattern, 30, 0.1);
      VariantConfig c;
      c.variant = Variant::e_dd;
      RunReport best_known = run_variant(inst, c);
      c.variant = Variant::seq;
      RunReport seq = run_variant(inst, c);
      g_sandwich.check(best_known);
      double bk = best_known.solution.objective;
      double s = seq.solution.objective;
      if (s > bk + 1e-9) never_better = false;
      if (bk > 0.0) {
        gap_sum += (bk - s) / bk;
        ++n;
      }
    }
  return never_better && n > 0 && gap_sum / n > 0.05 && seconds_since(t0) < 300.0;
}

// --- criterion 8: behavioral orderings on single-class slices ---
bool criterion8() {
  GeneratorConfig gc;
  double comp[4] = {0, 0, 0, 0}, acc[4] = {0, 0, 0, 0};
  long cnt[4] = {0, 0, 0, 0};
  for (int base = 0; base < 3; ++base)
    for (int pattern = 0; pattern < 3; ++pattern) {
      Instance inst = generate_instance(gc, base, pattern, 60, 0.3);
      VariantConfig c;
      c.variant = Variant::h_c;
      RunReport rep = run_variant(inst, c);
      int tag = pattern + 1;
      for (const Offer& o : rep.solution.offers) {
        comp[tag] += o.compensation;
        acc[tag] += o.acceptance_probability;
        ++cnt[tag];
      }
    }
  for (int tag = 1; tag <= 3; ++tag) {
    if (cnt[tag] == 0) return false;
    comp[tag] /= cnt[tag];
    acc[tag] /= cnt[tag];
  }
  return comp[3] > comp[2] && comp[2] > comp[1] && acc[1] > acc[2] && acc[2] > acc[3];
}

// --- criterion 9: E-DDC desk-scale wall time ---
bool criterion9() {
  GeneratorConfig gc;
  Instance inst = generate_instance(gc, 0, 5, 30, 0.5);  // 30 tasks, 15 drivers
  VariantConfig c;
  c.variant = Variant::e_ddc;
  c.workers = 1;
  Clock::time_point t0 = Clock::now();
  RunReport rep = run_variant(inst, c);
  double wall = seconds_since(t0);
  g_sandwich.check(rep);
  return wall < 10.0 && rep.status == SolveStatus::optimal;
}

// --- criterion 10: byte-identical artifacts across reruns ---
bool criterion10() {
  auto produce = [](const fs::path& dir) {
    fs::create_directories(dir);
    GeneratorConfig gc;
    gc.master_seed = 7;
    for (int pattern : {0, 5})
      for (int m : {6, 8}) {
        Instance inst = generate_instance(gc, 0, pattern, m, 0.5);
        save_instance(inst, (dir / (inst.name + ".txt")).string());
        for (Variant v : {Variant::e_dd, Variant::h_ddc, Variant::seq}) {
          VariantConfig c;
          c.variant = v;
          c.rng_seed = 3;
          RunReport rep = run_variant(inst, c);
          std::string stem = inst.name + "_" + to_string(v);
          save_solution(rep.solution, (dir / (stem + ".sol")).string());
          std::ofstream out(dir / (stem + ".rep"), std::ios::binary);
          out << format_report(rep);
        }
      }
  };
  fs::path root = fs::temp_directory_path() / "crowdship_acceptance";
  fs::remove_all(root);
  produce(root / "a");
  produce(root / "b");

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  int files = 0, twins = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    fs::path twin = root / "b" / entry.path().filename();
    if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) return false;
  }
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(root / "b")) ++twins;
  return files == 28 && twins == 28;  // 4 instances + 24 solution/report files
}

// --- criterion 11: kernel invariant suites ---
bool criterion11() {
  long violations = 0;

  // Lambert-W residuals across 17 decades
  for (int k = -8; k <= 8; ++k) {
    double x = std::pow(10.0, k);
    double w = lambert_w0(x);
    if (std::abs(w * std::exp(w) - x) > 1e-12 * std::max(1.0, x)) ++violations;
  }

  // logistic monotonicity: 10^4 ordered compensation pairs
  SplitMix64 rng(111);
  for (int i = 0; i < 10000; ++i) {
    BehaviorCoefficients b = draw_coeffs(rng);
    PredictorVector x = draw_predictors(rng);
    double c1 = rng.uniform_real(0.0, 30.0);
    double c2 = c1 + rng.uniform_real(0.0, 10.0);
    if (acceptance_probability(b, x, c1) > acceptance_probability(b, x, c2)) ++violations;
  }

  // detour telescoping: 10^4 random bundles
  for (int trial = 0; trial < 10000; ++trial) {
    Instance inst = testutil::make_instance(trial + 40000, 5, 1, 1e9);
    const DriverSpec& w = inst.drivers[0];
    std::vector<int> ids = {1, 2, 3, 4, 5};
    rng.shuffle(ids);
    int len = 1 + static_cast<int>(rng.uniform_int(0, 4));
    Bundle bun{0, std::vector<int>(ids.begin(), ids.begin() + len)};
    double acc = initial_detour(w, inst.depot(0));
    Point last = inst.depot(0).location;
    for (int tid : bun.task_order) {
      PathContext ctx{w.id, 0, last};
      acc += detour_increment(ctx, inst.task(tid), w);
      last = inst.task(tid).location;
    }
    if (std::abs(bundle_detour(inst, w, bun) - acc) > 1e-12) ++violations;
  }

  // corridor theta-monotonicity
  for (int trial = 0; trial < 200; ++trial) {
    Instance inst = testutil::make_instance(trial + 50000, 8, 1);
    double t1 = rng.uniform_real(0.0, 180.0), t2 = rng.uniform_real(0.0, 180.0);
    if (t1 > t2) std::swap(t1, t2);
    std::set<int> small = corridor_tasks(inst, inst.drivers[0], t1);
    std::set<int> big = corridor_tasks(inst, inst.drivers[0], t2);
    for (int tid : small)
      if (!big.count(tid)) ++violations;
  }

  return violations == 0;
}

int g_failures = 0;

void report(int num, const std::string& what, bool pass) {
  std::printf("criterion %2d (%s): %s\n", num, what.c_str(), pass ? "PASS" : "FAIL");
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

}  // namespace

int main() {
  bool c1 = criterion1();
  bool c2 = criterion2();

  std::vector<Instance> tiny;
  std::vector<double> opts;
  std::vector<RunReport> edd_reports;
  bool c3 = criterion3(tiny, opts, edd_reports);
  bool c4 = criterion4(tiny, edd_reports);
  bool c6 = criterion6();
  bool c7 = criterion7();
  bool c8 = criterion8();
  bool c9 = criterion9();
  // criterion 5 aggregates every bound observed while running 3, 6, 7 and 9
  bool c5 = g_sandwich.ok && g_sandwich.checked >= 200;
  bool c10 = criterion10();
  bool c11 = criterion11();

  report(1, "closed-form compensation vs grid oracle", c1);
  report(2, "reduced-cost identity incl. large exponents", c2);
  report(3, "exact variants match the oracle on 50 tiny instances", c3);
  report(4, "dominance and pruning toggles are lossless", c4);
  report(5, "bound sandwich and gap formula on all solved instances", c5);
  report(6, "H-DD/H-DDC mean gap_h <= 5% on the 30-task p=0.5 slice", c6);
  report(7, "SEQ never beats and trails best-known by > 5% on p=0.1", c7);
  report(8, "class orderings of compensation and acceptance", c8);
  report(9, "E-DDC solves 30 tasks / 15 drivers in under 10 s", c9);
  report(10, "byte-identical artifacts across reruns", c10);
  report(11, "kernel invariant suites show zero violations", c11);

  if (g_failures > 0) {
    std::printf("%d criteria FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
