#include "crowdship/orchestrator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <future>
#include <map>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "crowdship/geometry.hpp"
#include "crowdship/lpsolve.hpp"
#include "crowdship/probability.hpp"
#include "crowdship/rng.hpp"

namespace crowdship {

Variant variant_from_string(const std::string& name) {
  std::string s;
  s.reserve(name.size());
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "h-b") return Variant::h_b;
  if (s == "h-d") return Variant::h_d;
  if (s == "h-dd") return Variant::h_dd;
  if (s == "h-ddc") return Variant::h_ddc;
  if (s == "h-c") return Variant::h_c;
  if (s == "e-dd") return Variant::e_dd;
  if (s == "e-ddc") return Variant::e_ddc;
  if (s == "seq") return Variant::seq;
  throw ValidationError("unknown variant: " + name);
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::h_b: return "H-B";
    case Variant::h_d: return "H-D";
    case Variant::h_dd: return "H-DD";
    case Variant::h_ddc: return "H-DDC";
    case Variant::h_c: return "H-C";
    case Variant::e_dd: return "E-DD";
    case Variant::e_ddc: return "E-DDC";
    case Variant::seq: return "SEQ";
  }
  return "E-DD";
}

bool VariantConfig::use_dominance() const { return variant != Variant::h_b; }

bool VariantConfig::use_detour_limit() const {
  return variant != Variant::h_b && variant != Variant::h_d;
}

bool VariantConfig::use_corridor_init() const {
  return variant == Variant::h_ddc || variant == Variant::h_c || variant == Variant::e_ddc;
}

bool VariantConfig::do_enumeration() const {
  return variant == Variant::e_dd || variant == Variant::e_ddc;
}

namespace {

using Clock = std::chrono::steady_clock;

std::optional<Clock::time_point> deadline_from(double seconds) {
  if (!std::isfinite(seconds)) return std::nullopt;
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(std::max(seconds, 0.0)));
}

bool expired(const std::optional<Clock::time_point>& dl) {
  return dl && Clock::now() > *dl;
}

double remaining_seconds(const std::optional<Clock::time_point>& dl) {
  if (!dl) return std::numeric_limits<double>::infinity();
  return std::chrono::duration<double>(*dl - Clock::now()).count();
}

// Master rows: one <=1 row per task followed by one <=1 row per driver.
struct RowMap {
  std::unordered_map<int, int> task_row;
  std::unordered_map<int, int> driver_row;
  int m = 0;

  explicit RowMap(const Instance& instance) {
    for (const TaskSpec& t : instance.tasks) task_row[t.id] = m++;
    for (const DriverSpec& w : instance.drivers) driver_row[w.id] = m++;
  }
};

SparseColumn to_sparse(const RowMap& rows, const Column& col) {
  SparseColumn sc;
  for (int tid : col.bundle.task_order) sc.entries.push_back({rows.task_row.at(tid), 1.0});
  sc.entries.push_back({rows.driver_row.at(col.driver_id), 1.0});
  std::sort(sc.entries.begin(), sc.entries.end());
  return sc;
}

// Column pool with a duplicate guard keyed by (driver, depot, ordered tasks).
struct Pool {
  std::vector<Column> columns;
  std::set<std::tuple<int, int, std::vector<int>>> keys;

  bool insert(const Column& col) {
    if (!keys.insert({col.driver_id, col.bundle.depot_id, col.bundle.task_order}).second)
      return false;
    columns.push_back(col);
    return true;
  }
};

DualPrices extract_duals(const RowMap& rows, const std::vector<double>& row_duals) {
  DualPrices d;
  for (const auto& [tid, r] : rows.task_row) d.task_duals[tid] = row_duals[r];
  for (const auto& [wid, r] : rows.driver_row) d.driver_duals[wid] = row_duals[r];
  return d;
}

// Runs price_driver over all drivers, optionally concurrently; results are
// always merged in instance driver order so reports are worker-count
// independent.
std::vector<std::vector<Column>> price_all(const Instance& instance, const DualPrices& duals,
                                           const PricingConfig& base, const VariantConfig& config,
                                           const std::map<int, std::set<int>>* corridors) {
  auto price_one = [&](const DriverSpec& w) {
    PricingConfig pc = base;
    if (corridors) {
      auto it = corridors->find(w.id);
      pc.restrict_tasks = it == corridors->end() ? std::set<int>{} : it->second;
    }
    return price_driver(instance, w, duals, pc);
  };

  std::vector<std::vector<Column>> out(instance.drivers.size());
  if (config.workers <= 1) {
    for (std::size_t i = 0; i < instance.drivers.size(); ++i)
      out[i] = price_one(instance.drivers[i]);
    return out;
  }
  std::vector<std::future<std::vector<Column>>> futures(instance.drivers.size());
  for (std::size_t i = 0; i < instance.drivers.size(); ++i)
    futures[i] = std::async(std::launch::async, price_one, std::cref(instance.drivers[i]));
  for (std::size_t i = 0; i < instance.drivers.size(); ++i) out[i] = futures[i].get();
  return out;
}

std::map<int, std::set<int>> compute_corridors(const Instance& instance,
                                               const VariantConfig& config) {
  std::map<int, std::set<int>> corridors;
  for (const DriverSpec& w : instance.drivers) {
    try {
      corridors[w.id] = corridor_tasks(instance, w, config.theta_degrees);
    } catch (const DegenerateDriverError&) {
      corridors[w.id] = {};  // coincident origin/destination: skip the driver
    }
  }
  return corridors;
}

Offer offer_from_column(const Instance& instance, const Column& col) {
  Offer o;
  o.driver_id = col.driver_id;
  o.bundle = col.bundle;
  o.compensation = col.compensation;
  o.acceptance_probability = col.acceptance_probability;
  o.expected_savings = col.expected_savings;
  o.detour = bundle_detour(instance, instance.driver(col.driver_id), col.bundle);
  return o;
}

LinearProgram master_lp(const Instance& instance, const RowMap& rows,
                        const std::vector<Column>& columns) {
  LinearProgram lp;
  lp.row_bounds.assign(rows.m, 1.0);
  for (const Column& c : columns) {
    lp.objective_coeffs.push_back(c.expected_savings);
    lp.columns.push_back(to_sparse(rows, c));
    lp.variable_upper_bounds.push_back(std::numeric_limits<double>::infinity());
  }
  return lp;
}

}  // namespace

ColumnGenResult column_generation(const Instance& instance, const VariantConfig& config,
                                  std::vector<Column> seed_columns, bool corridor_restricted,
                                  double deadline_seconds) {
  auto deadline = deadline_from(deadline_seconds);
  RowMap rows(instance);
  SimplexSolver solver(rows.m, std::vector<double>(rows.m, 1.0));

  Pool pool;
  for (Column& c : seed_columns)
    if (pool.insert(c)) solver.add_column(c.expected_savings, to_sparse(rows, c));

  std::map<int, std::set<int>> corridors;
  if (corridor_restricted) corridors = compute_corridors(instance, config);

  ColumnGenResult res;
  while (true) {
    if (expired(deadline)) {
      res.hit_time_limit = true;
      break;
    }
    solver.solve();  // always feasible: y = 0 satisfies every packing row
    DualPrices duals = extract_duals(rows, solver.row_duals());
    res.duals = duals;
    ++res.iterations;

    PricingConfig pc;
    pc.use_dominance = config.use_dominance();
    pc.use_rc_pruning = true;
    pc.use_detour_limit = config.use_detour_limit();
    pc.column_limit_per_driver = config.column_limit;
    pc.deadline = deadline;

    auto per_driver =
        price_all(instance, duals, pc, config, corridor_restricted ? &corridors : nullptr);

    int added = 0;
    for (const auto& cols : per_driver)
      for (const Column& c : cols)
        if (pool.insert(c)) {
          solver.add_column(c.expected_savings, to_sparse(rows, c));
          ++added;
        }
    if (added == 0) {
      if (expired(deadline)) {
        res.hit_time_limit = true;  // pricing was cut short: the pool may be incomplete
      } else if (!corridor_restricted) {
        res.upper_bound = solver.objective();
      }
      break;
    }
  }
  res.columns = std::move(pool.columns);
  return res;
}

namespace {

// Columns with the same driver and task membership occupy identical master
// rows, so only the most valuable one can be selected; drop the rest.
std::vector<Column> best_per_task_set(const std::vector<Column>& columns) {
  std::map<std::tuple<int, int, std::vector<int>>, std::size_t> best;
  std::vector<Column> kept;
  for (const Column& c : columns) {
    std::vector<int> tasks = c.bundle.task_order;
    std::sort(tasks.begin(), tasks.end());
    auto [it, fresh] = best.try_emplace({c.driver_id, c.bundle.depot_id, std::move(tasks)},
                                        kept.size());
    if (fresh)
      kept.push_back(c);
    else if (c.expected_savings > kept[it->second].expected_savings)
      kept[it->second] = c;
  }
  return kept;
}

}  // namespace

Solution milp_heuristic(const Instance& instance, const std::vector<Column>& columns,
                        double time_limit_seconds) {
  std::vector<Column> kept = best_per_task_set(columns);
  RowMap rows(instance);
  LinearProgram lp = master_lp(instance, rows, kept);
  MilpResult res = solve_milp(lp, std::vector<bool>(kept.size(), true), time_limit_seconds);

  Solution sol;
  sol.status = res.status == MilpStatus::optimal ? SolveStatus::heuristic : SolveStatus::time_limit;
  for (std::size_t j = 0; j < kept.size(); ++j)
    if (res.primal[j] > 0.5) {
      Offer o = offer_from_column(instance, kept[j]);
      sol.objective += o.expected_savings;
      sol.offers.push_back(std::move(o));
    }
  return sol;
}

Solution enumerate_and_reoptimize(const Instance& instance, std::vector<Column> columns,
                                  double upper_bound, double lower_bound, const DualPrices& duals,
                                  const VariantConfig& config, double deadline_seconds) {
  auto deadline = deadline_from(deadline_seconds);

  PricingConfig pc;
  pc.use_dominance = config.use_dominance();
  pc.use_rc_pruning = true;
  pc.use_detour_limit = config.use_detour_limit();
  pc.enumeration_mode = true;
  pc.enumeration_threshold = lower_bound - upper_bound - 1e-9;
  pc.deadline = deadline;

  auto per_driver = price_all(instance, duals, pc, config, nullptr);

  Pool pool;
  for (Column& c : columns) pool.insert(c);
  bool pool_overflow = false;
  for (const auto& cols : per_driver)
    for (const Column& c : cols) {
      if (pool.columns.size() >= config.pool_cap) {
        pool_overflow = true;
        break;
      }
      pool.insert(c);
    }

  bool timed_out = expired(deadline);
  Solution sol = milp_heuristic(instance, pool.columns, remaining_seconds(deadline));
  if (sol.status == SolveStatus::time_limit || timed_out)
    sol.status = SolveStatus::time_limit;
  else
    sol.status = pool_overflow ? SolveStatus::heuristic : SolveStatus::optimal;
  return sol;
}

std::vector<Column> corridor_warm_start(const Instance& instance, const VariantConfig& config,
                                        double deadline_seconds) {
  return column_generation(instance, config, {}, true, deadline_seconds).columns;
}

RunReport run_variant(const Instance& instance, const VariantConfig& config) {
  if (config.variant == Variant::seq) return sequential_baseline(instance, config);

  Clock::time_point t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };
  auto remaining = [&] { return config.time_limit_seconds - elapsed(); };

  RunReport rep;

  std::vector<Column> seed;
  if (config.use_corridor_init()) seed = corridor_warm_start(instance, config, remaining());

  if (config.variant == Variant::h_c) {
    rep.solution = milp_heuristic(instance, seed, remaining());
    rep.lower_bound = rep.solution.objective;
    rep.columns_generated = static_cast<std::int64_t>(seed.size());
    rep.status = rep.solution.status == SolveStatus::time_limit ? SolveStatus::time_limit
                                                                : SolveStatus::heuristic;
    rep.solution.status = rep.status;
    rep.wall_time_seconds = elapsed();
    return rep;
  }

  ColumnGenResult cg = column_generation(instance, config, std::move(seed), false, remaining());
  rep.columns_generated = static_cast<std::int64_t>(cg.columns.size());
  rep.cg_iterations = cg.iterations;
  rep.upper_bound = cg.upper_bound;

  Solution sol = milp_heuristic(instance, cg.columns, remaining());
  rep.lower_bound = sol.objective;
  rep.status = cg.hit_time_limit || sol.status == SolveStatus::time_limit ? SolveStatus::time_limit
                                                                          : SolveStatus::heuristic;

  if (config.do_enumeration()) {
    if (cg.upper_bound && rep.status != SolveStatus::time_limit) {
      sol = enumerate_and_reoptimize(instance, cg.columns, *cg.upper_bound, sol.objective,
                                     cg.duals, config, remaining());
      rep.lower_bound = sol.objective;
      rep.status = sol.status;
    } else {
      rep.status = SolveStatus::time_limit;
    }
  }

  if (rep.upper_bound) {
    double ub = *rep.upper_bound;
    rep.gap_h = ub > 1e-12 ? (ub - rep.lower_bound) / ub : 0.0;
    sol.bound = ub;
  }
  sol.status = rep.status;
  rep.solution = std::move(sol);
  rep.wall_time_seconds = elapsed();
  return rep;
}

namespace {

constexpr double kSeqDetourMax = 5.0;
constexpr int kSeqRuns = 250;
constexpr int kSeqTopK = 5;
constexpr double kSeqMinAcceptance = 0.8;
constexpr double kSeqMinSavings = 1.0;

struct SeqBundle {
  int depot_id = 0;
  std::vector<int> order;
  double detour = 0.0;
  double load = 0.0;
  double outsource = 0.0;
};

}  // namespace

RunReport sequential_baseline(const Instance& instance, const VariantConfig& config) {
  Clock::time_point t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  // Step 1: randomized bundle generation per depot and driver; best (lowest
  // detour) representative per task set is retained.
  std::vector<Column> survivors;
  for (const DriverSpec& driver : instance.drivers) {
    std::map<std::vector<int>, SeqBundle> best_by_set;

    auto record = [&](const SeqBundle& b) {
      std::vector<int> key = b.order;
      std::sort(key.begin(), key.end());
      auto it = best_by_set.find(key);
      if (it == best_by_set.end() || b.detour < it->second.detour) best_by_set[key] = b;
    };

    for (const DepotSpec& depot : instance.depots) {
      double init = initial_detour(driver, depot);
      for (int seed_task : depot.servable_tasks) {
        const TaskSpec& st = instance.task(seed_task);
        if (st.load > driver.capacity) continue;
        PathContext ctx0{driver.id, depot.id, depot.location};
        double seed_detour = init + detour_increment(ctx0, st, driver);
        if (seed_detour > kSeqDetourMax) continue;

        SplitMix64 rng(mix64(config.rng_seed ^ mix64((static_cast<std::uint64_t>(driver.id) << 42) ^
                                                     (static_cast<std::uint64_t>(depot.id) << 21) ^
                                                     static_cast<std::uint64_t>(seed_task))));
        for (int run = 0; run < kSeqRuns; ++run) {
          SeqBundle b{depot.id, {seed_task}, seed_detour, st.load, st.outsource_cost};
          record(b);
          while (true) {
            // candidates: reachable, fit, and within the detour ceiling
            std::vector<std::pair<double, int>> cand;
            Point last = instance.task(b.order.back()).location;
            for (int tid : depot.servable_tasks) {
              if (std::find(b.order.begin(), b.order.end(), tid) != b.order.end()) continue;
              const TaskSpec& t = instance.task(tid);
              if (b.load + t.load > driver.capacity) continue;
              PathContext ctx{driver.id, depot.id, last};
              double inc = detour_increment(ctx, t, driver);
              if (b.detour + inc > kSeqDetourMax) continue;
              cand.push_back({inc, tid});
            }
            if (cand.empty()) break;
            std::sort(cand.begin(), cand.end());
            int pick = static_cast<int>(
                rng.uniform_int(0, std::min<std::int64_t>(kSeqTopK, cand.size()) - 1));
            const TaskSpec& t = instance.task(cand[pick].second);
            b.order.push_back(t.id);
            b.detour += cand[pick].first;
            b.load += t.load;
            b.outsource += t.outsource_cost;
            record(b);
          }
        }
      }
    }

    // Step 2: optimal compensations, then acceptance/savings filters.
    for (const auto& [key, b] : best_by_set) {
      PredictorVector x;
      x.detour = b.detour;
      x.bundle_size = static_cast<double>(b.order.size());
      double comp = optimal_compensation(driver.behavior, x, b.outsource);
      if (comp <= 0.0) continue;
      double p = acceptance_probability(driver.behavior, x, comp);
      if (p < kSeqMinAcceptance) continue;
      double es = expected_savings(p, b.outsource, comp);
      if (es < kSeqMinSavings) continue;
      Column col;
      col.driver_id = driver.id;
      col.bundle = {b.depot_id, b.order};
      col.compensation = comp;
      col.acceptance_probability = p;
      col.expected_savings = es;
      survivors.push_back(std::move(col));
    }
  }

  // Step 3: one MILP over the surviving offers.
  RunReport rep;
  rep.solution = milp_heuristic(instance, survivors,
                                config.time_limit_seconds - elapsed());
  rep.lower_bound = rep.solution.objective;
  rep.columns_generated = static_cast<std::int64_t>(survivors.size());
  rep.status = rep.solution.status == SolveStatus::time_limit ? SolveStatus::time_limit
                                                              : SolveStatus::heuristic;
  rep.solution.status = rep.status;
  rep.wall_time_seconds = elapsed();
  return rep;
}

std::string format_report(const RunReport& report, bool include_timing) {
  std::ostringstream out;
  out << "CROWDSHIP-REPORT v1\n";
  out << "status " << to_string(report.status) << "\n";
  out << "objective " << format_real(report.solution.objective) << "\n";
  out << "bound " << (report.upper_bound ? format_real(*report.upper_bound) : std::string("none"))
      << "\n";
  out << "lower_bound " << format_real(report.lower_bound) << "\n";
  out << "gap_h " << (report.gap_h ? format_real(*report.gap_h) : std::string("none")) << "\n";
  out << "columns_generated " << report.columns_generated << "\n";
  out << "cg_iterations " << report.cg_iterations << "\n";
  if (include_timing) out << "wall_time_seconds " << format_real(report.wall_time_seconds) << "\n";
  out << "offers " << report.solution.offers.size() << "\n";
  for (const Offer& o : report.solution.offers) {
    out << "offer " << o.driver_id << " " << o.bundle.depot_id << " ";
    for (std::size_t i = 0; i < o.bundle.task_order.size(); ++i) {
      if (i) out << ",";
      out << o.bundle.task_order[i];
    }
    out << " " << format_real(o.compensation) << " " << format_real(o.acceptance_probability)
        << " " << format_real(o.expected_savings) << " " << format_real(o.detour) << "\n";
  }
  return out.str();
}

}  // namespace crowdship
