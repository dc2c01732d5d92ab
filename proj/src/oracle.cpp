#include "crowdship/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "crowdship/geometry.hpp"
#include "crowdship/probability.hpp"

namespace crowdship {

namespace {

struct BestOffer {
  double savings = 0.0;
  Offer offer;
};

// Best expected savings per task subset for one driver, maximized over task
// orderings and pickup depots.
void enumerate_driver(const Instance& instance, const DriverSpec& driver,
                      const std::unordered_map<int, int>& bit_of,
                      std::unordered_map<unsigned, BestOffer>& best) {
  for (const DepotSpec& depot : instance.depots) {
    double init = initial_detour(driver, depot);

    struct Frame {
      std::vector<int> order;
      unsigned mask = 0;
      double load = 0.0, detour = 0.0, outsource = 0.0;
      Point last;
    };
    std::vector<int> servable(depot.servable_tasks.begin(), depot.servable_tasks.end());

    // Depth-first over ordered sequences.
    std::vector<Frame> stack;
    stack.push_back({{}, 0u, 0.0, init, 0.0, depot.location});
    while (!stack.empty()) {
      Frame fr = std::move(stack.back());
      stack.pop_back();
      for (int tid : servable) {
        int bit = bit_of.at(tid);
        if (fr.mask & (1u << bit)) continue;
        const TaskSpec& t = instance.task(tid);
        if (fr.load + t.load > driver.capacity) continue;
        Frame nx = fr;
        nx.order.push_back(tid);
        nx.mask |= 1u << bit;
        nx.load += t.load;
        PathContext ctx{driver.id, depot.id, fr.last};
        nx.detour += detour_increment(ctx, t, driver);
        nx.outsource += t.outsource_cost;
        nx.last = t.location;

        PredictorVector x;
        x.detour = nx.detour;
        x.bundle_size = static_cast<double>(nx.order.size());
        double comp = optimal_compensation(driver.behavior, x, nx.outsource);
        if (comp > 0.0) {
          double p = acceptance_probability(driver.behavior, x, comp);
          double es = expected_savings(p, nx.outsource, comp);
          auto it = best.find(nx.mask);
          if (es > 0.0 && (it == best.end() || es > it->second.savings)) {
            Offer o;
            o.driver_id = driver.id;
            o.bundle = {depot.id, nx.order};
            o.compensation = comp;
            o.acceptance_probability = p;
            o.expected_savings = es;
            o.detour = nx.detour;
            best[nx.mask] = {es, std::move(o)};
          }
        }
        stack.push_back(std::move(nx));
      }
    }
  }
}

}  // namespace

Solution oracle_solve(const Instance& instance) {
  if (instance.tasks.size() > 8 || instance.drivers.size() > 3)
    throw OracleLimitError("oracle limited to 8 tasks and 3 drivers (" +
                           std::to_string(instance.tasks.size()) + " tasks, " +
                           std::to_string(instance.drivers.size()) + " drivers)");

  std::unordered_map<int, int> bit_of;
  for (std::size_t i = 0; i < instance.tasks.size(); ++i)
    bit_of[instance.tasks[i].id] = static_cast<int>(i);
  unsigned full = (1u << instance.tasks.size()) - 1;

  std::vector<std::unordered_map<unsigned, BestOffer>> per_driver(instance.drivers.size());
  for (std::size_t w = 0; w < instance.drivers.size(); ++w)
    enumerate_driver(instance, instance.drivers[w], bit_of, per_driver[w]);

  // dp2[mask] after processing a prefix of drivers: best savings with `mask`
  // tasks consumed. trans[w] records the last strict improvement per state, so
  // the backward walk below recovers the optimal assignment.
  std::vector<double> dp2(full + 1, -1.0);
  dp2[0] = 0.0;
  std::vector<std::unordered_map<unsigned, std::pair<unsigned, unsigned>>> trans(
      instance.drivers.size());
  for (std::size_t w = 0; w < instance.drivers.size(); ++w) {
    std::vector<double> next = dp2;
    for (unsigned mask = 0; mask <= full; ++mask) {
      if (dp2[mask] < 0.0) continue;
      // carrying forward without an offer
      if (dp2[mask] > next[mask]) next[mask] = dp2[mask];
      for (const auto& [subset, bo] : per_driver[w]) {
        if (subset & mask) continue;
        unsigned nm = mask | subset;
        double v = dp2[mask] + bo.savings;
        if (v > next[nm] + 1e-15) {
          next[nm] = v;
          trans[w][nm] = {mask, subset};
        }
      }
    }
    dp2 = std::move(next);
  }

  unsigned best_mask = 0;
  for (unsigned mask = 0; mask <= full; ++mask)
    if (dp2[mask] > dp2[best_mask]) best_mask = mask;

  Solution sol;
  sol.objective = dp2[best_mask];
  sol.status = SolveStatus::optimal;
  sol.bound = sol.objective;

  unsigned mask = best_mask;
  for (std::size_t w = instance.drivers.size(); w-- > 0;) {
    auto it = trans[w].find(mask);
    if (it == trans[w].end()) continue;  // this driver got no offer on the optimal path
    auto [prev, subset] = it->second;
    sol.offers.push_back(per_driver[w].at(subset).offer);
    mask = prev;
  }
  std::reverse(sol.offers.begin(), sol.offers.end());
  return sol;
}

}  // namespace crowdship
