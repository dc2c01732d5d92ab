#include "crowdship/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <queue>
#include <tuple>

namespace crowdship {

namespace {

constexpr double kRcTolerance = 1e-9;

double driver_mu(const DualPrices& duals, int driver_id) { return duals.driver_dual(driver_id); }

}  // namespace

std::vector<Label> init_labels(const Instance& instance, const DriverSpec& driver,
                               const DualPrices& duals, const PricingConfig& config) {
  std::vector<Label> labels;
  double mu = driver_mu(duals, driver.id);
  for (const DepotSpec& depot : instance.depots) {
    Label l;
    l.driver_id = driver.id;
    l.depot_id = depot.id;
    l.predictors.detour = initial_detour(driver, depot);
    l.predictors.bundle_size = 0.0;
    l.predictors.extras.assign(config.extra_updates.size(), 0.0);
    l.outsource_total = 0.0;
    l.dual_task_sum = 0.0;
    l.reduced_cost = -mu;
    l.last_location = depot.location;
    for (int tid : depot.servable_tasks) {
      if (config.restrict_tasks && !config.restrict_tasks->count(tid)) continue;
      if (instance.task(tid).load <= driver.capacity) l.reachable.push_back(tid);
    }
    labels.push_back(std::move(l));
  }
  return labels;
}

Label extend(const Instance& instance, const Label& label, int task_id, const DualPrices& duals,
             const PricingConfig& config) {
  if (!std::binary_search(label.reachable.begin(), label.reachable.end(), task_id))
    throw std::logic_error("extend: task " + std::to_string(task_id) + " not reachable");
  const DriverSpec& driver = instance.driver(label.driver_id);
  const TaskSpec& task = instance.task(task_id);

  Label f = label;
  f.task_order.push_back(task_id);
  f.used_capacity += task.load;
  PathContext ctx{label.driver_id, label.depot_id, label.last_location};
  f.predictors.detour += detour_increment(ctx, task, driver);
  f.predictors.bundle_size += 1.0;
  for (std::size_t i = 0; i < config.extra_updates.size(); ++i)
    f.predictors.extras[i] += config.extra_updates[i](driver, label.last_location, task);
  f.outsource_total += task.outsource_cost;
  f.dual_task_sum += duals.task_dual(task_id);
  f.last_location = task.location;

  f.reachable.erase(std::remove_if(f.reachable.begin(), f.reachable.end(),
                                   [&](int tid) {
                                     return tid == task_id ||
                                            f.used_capacity + instance.task(tid).load >
                                                driver.capacity;
                                   }),
                    f.reachable.end());
  f.reduced_cost = reduced_cost(driver.behavior, f.predictors, f.outsource_total, f.dual_task_sum,
                                driver_mu(duals, label.driver_id));
  return f;
}

namespace {

// Bundle-dependent part of the exponent that dominance condition (i) compares:
// B.X + gamma * Cbar (the constant alpha and driver terms cancel).
double dominance_score(const BehaviorCoefficients& b, const Label& l) {
  double s = b.detour_coeff * l.predictors.detour + b.size_coeff * l.predictors.bundle_size;
  for (std::size_t i = 0; i < l.predictors.extras.size(); ++i) {
    double c = i < b.extra_bundle_coeffs.size() ? b.extra_bundle_coeffs[i] : 0.0;
    s += c * l.predictors.extras[i];
  }
  return s + b.compensation_coeff * l.outsource_total;
}

bool is_superset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

bool dominates(const Instance& instance, const Label& lp, const Label& lf) {
  // Caller guarantees: same driver, same depot, bundles end at the same task.
  const BehaviorCoefficients& coeffs = instance.driver(lp.driver_id).behavior;
  if (lp.dual_task_sum > lf.dual_task_sum) return false;
  if (lp.used_capacity > lf.used_capacity) return false;
  if (dominance_score(coeffs, lp) < dominance_score(coeffs, lf)) return false;
  return is_superset(lp.reachable, lf.reachable);
}

bool route_dominates(const Label& lp, const Label& lf) {
  return lp.reduced_cost > lf.reduced_cost && is_superset(lp.reachable, lf.reachable);
}

int k_max(const Instance& instance, const Label& label) {
  const DriverSpec& driver = instance.driver(label.driver_id);
  std::vector<double> loads;
  loads.reserve(label.reachable.size());
  for (int tid : label.reachable) loads.push_back(instance.task(tid).load);
  std::sort(loads.begin(), loads.end());
  double used = label.used_capacity;
  int k = 0;
  for (double q : loads) {
    if (used + q > driver.capacity) break;
    used += q;
    ++k;
  }
  return k;
}

namespace {

// Per-driver distance tables: detour increments collapse to array lookups in
// the hot bound computations instead of repeated hypot calls.
struct GeomCache {
  std::vector<int> idx;   // (task id - id_lo) -> dense index, -1 when absent
  int id_lo = 0;
  std::vector<double> te;  // d(task, e_w)
  std::vector<std::vector<double>> tt;
  std::unordered_map<int, std::pair<double, std::vector<double>>> depot;  // d(depot,e), d(depot,t)

  int dense(int task_id) const { return idx[task_id - id_lo]; }

  double inc_from_task(int s, int t) const {  // dense indices
    double d = tt[s][t] + te[t] - te[s];
    return d < 0.0 ? 0.0 : d;
  }
  double inc_from_depot(int depot_id, int t) const {
    const auto& [de, dt] = depot.at(depot_id);
    double d = dt[t] + te[t] - de;
    return d < 0.0 ? 0.0 : d;
  }
  double inc_from_label(const Label& l, int task_id) const {
    int t = dense(task_id);
    return l.task_order.empty() ? inc_from_depot(l.depot_id, t)
                                : inc_from_task(dense(l.task_order.back()), t);
  }
};

GeomCache build_cache(const Instance& instance, const DriverSpec& driver) {
  GeomCache g;
  int n = static_cast<int>(instance.tasks.size());
  int lo = instance.tasks.empty() ? 0 : instance.tasks[0].id;
  int hi = lo;
  for (const TaskSpec& t : instance.tasks) {
    lo = std::min(lo, t.id);
    hi = std::max(hi, t.id);
  }
  g.id_lo = lo;
  g.idx.assign(static_cast<std::size_t>(hi - lo) + 1, -1);
  g.te.resize(n);
  g.tt.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    g.idx[instance.tasks[i].id - lo] = i;
    g.te[i] = distance(instance.tasks[i].location, driver.destination);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      g.tt[i][j] = g.tt[j][i] = distance(instance.tasks[i].location, instance.tasks[j].location);
  for (const DepotSpec& d : instance.depots) {
    std::vector<double> dt(n);
    for (int i = 0; i < n; ++i) dt[i] = distance(d.location, instance.tasks[i].location);
    g.depot[d.id] = {distance(d.location, driver.destination), std::move(dt)};
  }
  return g;
}

// Extrema used by Corollaries 1-5; independent of k, so computed once per label.
struct ExtensionBounds {
  double u_detour_min = 0.0, u_detour_max = 0.0;
  std::vector<std::pair<double, double>> u_extras;  // (min, max) per extra predictor
  double c_min = 0.0, c_max = 0.0;
  double pi_min = 0.0, pi_max = 0.0;
};

ExtensionBounds extension_bounds(const Instance& instance, const Label& label,
                                 const DualPrices& duals, const PricingConfig& config,
                                 const GeomCache* gc = nullptr) {
  const DriverSpec& driver = instance.driver(label.driver_id);
  ExtensionBounds b;
  b.u_detour_min = std::numeric_limits<double>::infinity();
  b.u_detour_max = -std::numeric_limits<double>::infinity();
  b.u_extras.assign(config.extra_updates.size(),
                    {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
  b.c_min = b.pi_min = std::numeric_limits<double>::infinity();
  b.c_max = b.pi_max = -std::numeric_limits<double>::infinity();

  for (int tid : label.reachable) {
    const TaskSpec& t = instance.task(tid);
    b.c_min = std::min(b.c_min, t.outsource_cost);
    b.c_max = std::max(b.c_max, t.outsource_cost);
    double pi = duals.task_dual(tid);
    b.pi_min = std::min(b.pi_min, pi);
    b.pi_max = std::max(b.pi_max, pi);
  }

  if (gc && config.extra_updates.empty()) {
    // Fast path: dense-index table lookups, no callable predictors. The >= 0
    // clamp commutes with min/max, so raw extrema are clamped once at the end.
    std::size_t n = label.reachable.size();
    std::vector<int> rd(n);
    std::vector<double> tes(n);
    std::size_t p = 0;
    for (int tid : label.reachable) {
      rd[p] = gc->dense(tid);
      tes[p] = gc->te[rd[p]];
      ++p;
    }
    const auto& [de, dt] = gc->depot.at(label.depot_id);
    int from = label.task_order.empty() ? -1 : gc->dense(label.task_order.back());
    double raw_min = std::numeric_limits<double>::infinity(), raw_max = -raw_min;
    for (std::size_t a = 0; a < n; ++a) {
      int t = rd[a];
      double tet = tes[a];
      double u0 = (from < 0 ? dt[t] - de : gc->tt[from][t] - gc->te[from]) + tet;
      raw_min = std::min(raw_min, u0);
      raw_max = std::max(raw_max, u0);
      const std::vector<double>& row_t = gc->tt[t];
      for (std::size_t s = 0; s < n; ++s) {
        if (s == a) continue;
        double u = row_t[rd[s]] - tes[s] + tet;
        raw_min = std::min(raw_min, u);
        raw_max = std::max(raw_max, u);
      }
    }
    b.u_detour_min = raw_min < 0.0 ? 0.0 : raw_min;
    b.u_detour_max = raw_max < 0.0 ? 0.0 : raw_max;
    return b;
  }

  std::vector<std::pair<int, Point>> sources;  // (-1, last location) plus reachable tasks
  sources.emplace_back(-1, label.last_location);
  for (int sid : label.reachable) sources.emplace_back(sid, instance.task(sid).location);

  for (int tid : label.reachable) {
    const TaskSpec& t = instance.task(tid);
    for (const auto& [sid, sloc] : sources) {
      if (sid == tid) continue;  // a task never follows itself
      PathContext ctx{label.driver_id, label.depot_id, sloc};
      double u = detour_increment(ctx, t, driver);
      b.u_detour_min = std::min(b.u_detour_min, u);
      b.u_detour_max = std::max(b.u_detour_max, u);
      for (std::size_t i = 0; i < config.extra_updates.size(); ++i) {
        double ue = config.extra_updates[i](driver, sloc, t);
        b.u_extras[i].first = std::min(b.u_extras[i].first, ue);
        b.u_extras[i].second = std::max(b.u_extras[i].second, ue);
      }
    }
  }
  return b;
}

double rc_bound_from(const Instance& instance, const Label& label, const DualPrices& duals, int k,
                     const PricingConfig& config, const ExtensionBounds& b) {
  const DriverSpec& driver = instance.driver(label.driver_id);
  const BehaviorCoefficients& coeffs = driver.behavior;
  PredictorVector xhat = label.predictors;
  xhat.detour += k * (coeffs.detour_coeff > 0.0 ? b.u_detour_max : b.u_detour_min);
  xhat.bundle_size += k;  // size update is exactly 1 per added task
  for (std::size_t i = 0; i < xhat.extras.size(); ++i) {
    double c = i < coeffs.extra_bundle_coeffs.size() ? coeffs.extra_bundle_coeffs[i] : 0.0;
    xhat.extras[i] += k * (c > 0.0 ? b.u_extras[i].second : b.u_extras[i].first);
  }
  double c_hat = label.outsource_total + k * b.c_max;
  double pi_hat = label.dual_task_sum + k * b.pi_min;
  return reduced_cost(coeffs, xhat, c_hat, pi_hat, driver_mu(duals, label.driver_id));
}

double detour_bound_from(const Instance& instance, const Label& label, const DualPrices& duals,
                         int k, const ExtensionBounds& b, double threshold) {
  const double inf = std::numeric_limits<double>::infinity();
  const DriverSpec& driver = instance.driver(label.driver_id);
  const BehaviorCoefficients& coeffs = driver.behavior;
  if (!label.predictors.extras.empty()) return inf;  // bound is detour/size specific
  if (!(coeffs.detour_coeff < 0.0)) return inf;
  double gamma = coeffs.compensation_coeff;
  double mu = driver_mu(duals, label.driver_id);
  double pi_hat = label.dual_task_sum + k * b.pi_min;
  double eta = gamma * (pi_hat + mu + threshold);
  if (eta <= 0.0) return inf;  // reduced cost can reach the floor at any detour
  double c_hat = label.outsource_total + k * b.c_max;
  double b_hat = label.predictors.bundle_size + k;
  double numer = std::log(eta) + eta - coeffs.intercept - coeffs.driver_term() -
                 coeffs.size_coeff * b_hat - gamma * c_hat + 1.0;
  return numer / coeffs.detour_coeff;
}

// One bounds computation per label: detour-ceiling trimming (in place)
// followed by the prune decision, cached on the label for the pop phase.
// The extrema are taken over the pre-trim reachable set, which is valid (the
// true post-trim extrema are at least as tight).
void prepare_label(const Instance& instance, Label& l, const DualPrices& duals,
                   const PricingConfig& config, double threshold, const GeomCache* gc) {
  l.no_extend = false;
  if (!config.use_rc_pruning && !config.use_detour_limit) return;
  if (l.reachable.empty()) return;
  int kmx = k_max(instance, l);
  if (kmx == 0) {
    l.no_extend = true;
    return;
  }
  ExtensionBounds b = extension_bounds(instance, l, duals, config, gc);

  if (config.use_detour_limit) {
    double ceiling = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= kmx; ++k)
      ceiling = std::max(ceiling, detour_bound_from(instance, l, duals, k, b, threshold));
    if (!std::isinf(ceiling)) {
      const DriverSpec& driver = instance.driver(l.driver_id);
      l.reachable.erase(std::remove_if(l.reachable.begin(), l.reachable.end(),
                                       [&](int tid) {
                                         double inc;
                                         if (gc) {
                                           inc = gc->inc_from_label(l, tid);
                                         } else {
                                           PathContext ctx{l.driver_id, l.depot_id,
                                                           l.last_location};
                                           inc = detour_increment(ctx, instance.task(tid), driver);
                                         }
                                         return l.predictors.detour + inc >= ceiling;
                                       }),
                        l.reachable.end());
      if (l.reachable.empty()) {
        l.no_extend = true;
        return;
      }
      kmx = k_max(instance, l);
      if (kmx == 0) {
        l.no_extend = true;
        return;
      }
    }
  }

  if (config.use_rc_pruning) {
    bool prune = true;
    for (int k = 1; k <= kmx; ++k)
      if (rc_bound_from(instance, l, duals, k, config, b) > threshold) {
        prune = false;
        break;
      }
    l.no_extend = prune;
  }
}

bool can_prune_impl(const Instance& instance, const Label& label, const DualPrices& duals,
                    const PricingConfig& config, double threshold, const GeomCache* gc) {
  int kmx = k_max(instance, label);
  if (kmx == 0) return true;
  ExtensionBounds b = extension_bounds(instance, label, duals, config, gc);
  for (int k = 1; k <= kmx; ++k)
    if (rc_bound_from(instance, label, duals, k, config, b) > threshold) return false;
  return true;
}

Label trim_successors_impl(const Instance& instance, const Label& label, const DualPrices& duals,
                           const PricingConfig& config, double threshold, const GeomCache* gc) {
  int kmx = k_max(instance, label);
  if (kmx == 0 || label.reachable.empty()) return label;
  ExtensionBounds b = extension_bounds(instance, label, duals, config, gc);
  double ceiling = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= kmx; ++k)
    ceiling = std::max(ceiling, detour_bound_from(instance, label, duals, k, b, threshold));
  if (std::isinf(ceiling)) return label;

  const DriverSpec& driver = instance.driver(label.driver_id);
  Label out = label;
  out.reachable.erase(std::remove_if(out.reachable.begin(), out.reachable.end(),
                                     [&](int tid) {
                                       double inc;
                                       if (gc) {
                                         inc = gc->inc_from_label(label, tid);
                                       } else {
                                         PathContext ctx{label.driver_id, label.depot_id,
                                                         label.last_location};
                                         inc = detour_increment(ctx, instance.task(tid), driver);
                                       }
                                       return label.predictors.detour + inc >= ceiling;
                                     }),
                      out.reachable.end());
  return out;
}

}  // namespace

double rc_upper_bound(const Instance& instance, const Label& label, const DualPrices& duals,
                      int k, const PricingConfig& config) {
  if (label.reachable.empty()) throw DomainError("rc_upper_bound: no extension exists");
  ExtensionBounds b = extension_bounds(instance, label, duals, config);
  return rc_bound_from(instance, label, duals, k, config, b);
}

bool can_prune(const Instance& instance, const Label& label, const DualPrices& duals,
               const PricingConfig& config, double threshold) {
  return can_prune_impl(instance, label, duals, config, threshold, nullptr);
}

double detour_bound(const Instance& instance, const Label& label, const DualPrices& duals, int k,
                    const PricingConfig& config, double threshold) {
  ExtensionBounds b = extension_bounds(instance, label, duals, config);
  return detour_bound_from(instance, label, duals, k, b, threshold);
}

Label trim_successors(const Instance& instance, const Label& label, const DualPrices& duals,
                      const PricingConfig& config, double threshold) {
  return trim_successors_impl(instance, label, duals, config, threshold, nullptr);
}

namespace {

using LabelPtr = std::shared_ptr<Label>;

struct QueueCompare {
  bool operator()(const LabelPtr& a, const LabelPtr& b) const {
    if (a->reduced_cost != b->reduced_cost) return a->reduced_cost < b->reduced_cost;
    return a->creation_order > b->creation_order;
  }
};

std::optional<Column> make_column(const Instance& instance, const Label& label) {
  const DriverSpec& driver = instance.driver(label.driver_id);
  double comp = optimal_compensation(driver.behavior, label.predictors, label.outsource_total);
  if (comp <= 0.0) return std::nullopt;  // worthless: never accepted without pay
  double p = acceptance_probability(driver.behavior, label.predictors, comp);
  Column col;
  col.driver_id = label.driver_id;
  col.bundle.depot_id = label.depot_id;
  col.bundle.task_order = label.task_order;
  col.compensation = comp;
  col.acceptance_probability = p;
  col.expected_savings = expected_savings(p, label.outsource_total, comp);
  col.reduced_cost_at_generation = label.reduced_cost;
  return col;
}

}  // namespace

std::vector<Column> price_driver(const Instance& instance, const DriverSpec& driver,
                                 const DualPrices& duals, const PricingConfig& config) {
  std::vector<Column> columns;
  double prune_threshold = config.enumeration_mode ? config.enumeration_threshold : 0.0;
  GeomCache gc = build_cache(instance, driver);

  std::uint64_t counter = 0;
  std::priority_queue<LabelPtr, std::vector<LabelPtr>, QueueCompare> queue;

  // Dominance stores. Standard mode groups by (depot, last task); enumeration
  // mode groups by (depot, last task, task set) for search pruning — only
  // labels ending at the same location have comparable extensions — and keeps
  // the best column per (depot, task set) for the emitted pool.
  std::map<std::pair<int, int>, std::vector<LabelPtr>> by_last_task;
  std::map<std::tuple<int, int, std::vector<int>>, std::vector<LabelPtr>> by_set_last;
  std::map<std::pair<int, std::vector<int>>, Column> best_by_set;

  for (Label& l : init_labels(instance, driver, duals, config)) {
    prepare_label(instance, l, duals, config, prune_threshold, &gc);
    auto p = std::make_shared<Label>(std::move(l));
    p->creation_order = counter++;
    queue.push(std::move(p));
  }

  while (!queue.empty()) {
    if (config.deadline && std::chrono::steady_clock::now() > *config.deadline) break;
    LabelPtr label = queue.top();
    queue.pop();
    if (label->dominated) continue;

    if (!label->task_order.empty()) {
      bool emit = config.enumeration_mode ? label->reduced_cost >= config.enumeration_threshold
                                          : label->reduced_cost > kRcTolerance;
      if (emit) {
        if (auto col = make_column(instance, *label)) {
          if (config.enumeration_mode) {
            std::vector<int> key_tasks = label->task_order;
            std::sort(key_tasks.begin(), key_tasks.end());
            auto [it, inserted] =
                best_by_set.try_emplace({label->depot_id, std::move(key_tasks)}, *col);
            if (!inserted && col->reduced_cost_at_generation > it->second.reduced_cost_at_generation)
              it->second = std::move(*col);
          } else {
            columns.push_back(std::move(*col));
            if (static_cast<int>(columns.size()) >= config.column_limit_per_driver) break;
          }
        }
      }
    }

    if (label->reachable.empty()) continue;
    if (config.use_rc_pruning && label->no_extend) continue;

    for (int tid : label->reachable) {
      Label ext = extend(instance, *label, tid, duals, config);
      prepare_label(instance, ext, duals, config, prune_threshold, &gc);
      auto f = std::make_shared<Label>(std::move(ext));
      f->creation_order = counter++;

      if (config.enumeration_mode) {
        std::vector<int> key_tasks = f->task_order;
        std::sort(key_tasks.begin(), key_tasks.end());
        auto& bucket = by_set_last[{f->depot_id, tid, std::move(key_tasks)}];
        bool discarded = false;
        for (const LabelPtr& s : bucket)
          if (!s->dominated && s->reduced_cost >= f->reduced_cost &&
              is_superset(s->reachable, f->reachable)) {
            discarded = true;
            break;
          }
        if (discarded) continue;
        for (const LabelPtr& s : bucket)
          if (!s->dominated && f->reduced_cost >= s->reduced_cost &&
              is_superset(f->reachable, s->reachable))
            s->dominated = true;
        bucket.push_back(f);
      } else if (config.use_dominance) {
        auto& bucket = by_last_task[{f->depot_id, tid}];
        bool discarded = false;
        for (const LabelPtr& s : bucket)
          if (!s->dominated && dominates(instance, *s, *f)) {
            discarded = true;
            break;
          }
        if (discarded) continue;
        for (const LabelPtr& s : bucket)
          if (!s->dominated && dominates(instance, *f, *s)) s->dominated = true;
        bucket.push_back(f);
      }
      queue.push(std::move(f));
    }
  }
  for (auto& [key, col] : best_by_set) columns.push_back(std::move(col));
  return columns;
}

}  // namespace crowdship
