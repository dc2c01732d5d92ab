#include "crowdship/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "crowdship/rng.hpp"

namespace crowdship {

BehaviorCoefficients class_coefficients(int class_tag) {
  BehaviorCoefficients b;
  switch (class_tag) {
    case 1: b.intercept = -5.0; b.detour_coeff = -3.0; b.size_coeff = -4.0; b.compensation_coeff = 2.5; break;
    case 2: b.intercept = -4.5; b.detour_coeff = -2.5; b.size_coeff = -3.5; b.compensation_coeff = 2.0; break;
    case 3: b.intercept = -4.0; b.detour_coeff = -2.0; b.size_coeff = -3.0; b.compensation_coeff = 1.5; break;
    default: throw ValidationError("class_tag must be in {1,2,3}, got " + std::to_string(class_tag));
  }
  return b;
}

std::string pattern_name(int pattern_index) {
  static const char* names[] = {"c1", "c2", "c3", "m1", "m2", "m3", "m4", "m5"};
  if (pattern_index < 0 || pattern_index > 7)
    throw ValidationError("pattern index must be in 0..7, got " + std::to_string(pattern_index));
  return names[pattern_index];
}

namespace {

std::string ratio_text(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", p);
  return buf;
}

// Class tags for all full_drivers drivers of one (base, pattern) combination.
// Mixed patterns assign a fresh shuffled permutation of {1,2,3} to each
// consecutive driver triple, so every prefix stays balanced within +-1.
std::vector<int> class_assignment(const GeneratorConfig& config, int base_index,
                                  int pattern_index) {
  std::vector<int> tags(config.full_drivers);
  if (pattern_index < 3) {
    std::fill(tags.begin(), tags.end(), pattern_index + 1);
    return tags;
  }
  SplitMix64 rng(mix64(config.master_seed ^
                       mix64(0xC1A5500000000000ULL + static_cast<std::uint64_t>(base_index) * 8 +
                             static_cast<std::uint64_t>(pattern_index))));
  for (int i = 0; i < config.full_drivers; i += 3) {
    std::vector<int> triple = {1, 2, 3};
    rng.shuffle(triple);
    for (int j = 0; j < 3 && i + j < config.full_drivers; ++j) tags[i + j] = triple[j];
  }
  return tags;
}

}  // namespace

Instance generate_instance(const GeneratorConfig& config, int base_index, int pattern_index,
                           int num_tasks, double driver_ratio) {
  if (num_tasks < 1 || num_tasks > config.full_tasks)
    throw ValidationError("num_tasks out of range: " + std::to_string(num_tasks));
  int num_drivers = static_cast<int>(std::llround(driver_ratio * num_tasks));
  if (num_drivers < 1 || num_drivers > config.full_drivers)
    throw ValidationError("driver count out of range: " + std::to_string(num_drivers));

  // Geometry depends only on the base, so all patterns and reductions of one
  // base share task/driver prefixes.
  SplitMix64 geo(mix64(config.master_seed ^
                       mix64(0xBA5E000000000000ULL + static_cast<std::uint64_t>(base_index))));
  double hw = config.region_half_width;

  Instance inst;
  inst.seed = static_cast<std::int64_t>(config.master_seed);

  std::vector<TaskSpec> full_tasks(config.full_tasks);
  for (int i = 0; i < config.full_tasks; ++i) {
    TaskSpec& t = full_tasks[i];
    t.id = i + 1;
    t.location.x = geo.uniform_real(-hw, hw);
    t.location.y = geo.uniform_real(-hw, hw);
    t.load = static_cast<double>(geo.uniform_int(config.load_min, config.load_max));
    t.outsource_cost = config.outsource_cost;
  }
  std::vector<Point> destinations(config.full_drivers);
  for (int i = 0; i < config.full_drivers; ++i) {
    destinations[i].x = geo.uniform_real(-hw, hw);
    destinations[i].y = geo.uniform_real(-hw, hw);
  }
  std::vector<int> tags = class_assignment(config, base_index, pattern_index);

  inst.tasks.assign(full_tasks.begin(), full_tasks.begin() + num_tasks);

  DepotSpec depot;
  depot.id = 0;
  depot.location = {0.0, 0.0};  // the store, at the origin
  for (const TaskSpec& t : inst.tasks) depot.servable_tasks.insert(t.id);
  inst.depots.push_back(std::move(depot));

  for (int i = 0; i < num_drivers; ++i) {
    DriverSpec w;
    w.id = i + 1;
    w.origin = {0.0, 0.0};  // in-store customers start at the depot
    w.destination = destinations[i];
    w.capacity = config.capacity;
    w.behavior = class_coefficients(tags[i]);
    w.class_tag = tags[i];
    inst.drivers.push_back(std::move(w));
  }

  inst.name = std::to_string(base_index) + "_" + pattern_name(pattern_index) + "_" +
              std::to_string(num_tasks) + "_" + ratio_text(driver_ratio);
  inst.finalize();
  return inst;
}

std::vector<Instance> generate_library(const GeneratorConfig& config) {
  std::vector<Instance> out;
  for (int base = 0; base < config.n_full_instances; ++base)
    for (int pattern = 0; pattern < 8; ++pattern)
      for (int m : config.task_sizes)
        for (double p : config.driver_ratios)
          out.push_back(generate_instance(config, base, pattern, m, p));
  return out;
}

namespace {

struct OfferMeans {
  double acceptance = 0.0, compensation = 0.0, size = 0.0, detour = 0.0;
  std::int64_t count = 0;

  void add(const Offer& o) {
    acceptance += o.acceptance_probability;
    compensation += o.compensation;
    size += static_cast<double>(o.bundle.task_order.size());
    detour += o.detour;
    ++count;
  }
};

std::string opt_text(const std::optional<double>& v) {
  return v ? format_real(*v) : std::string("none");
}

}  // namespace

std::vector<MetricsRow> compute_gaps(const std::vector<ReportEntry>& reports,
                                     const std::map<std::string, double>& reference_objectives) {
  std::vector<MetricsRow> rows;
  for (const ReportEntry& e : reports) {
    MetricsRow r;
    r.instance = e.instance;
    r.variant = e.variant;
    r.objective = e.report.solution.objective;
    r.upper_bound = e.report.upper_bound;
    r.gap_h = e.report.gap_h;
    r.wall_time = e.report.wall_time_seconds;

    auto ref = reference_objectives.find(e.instance);
    if (ref != reference_objectives.end() && ref->second > 0.0) {
      double g = std::max(0.0, (ref->second - r.objective) / ref->second);
      if (e.variant == "SEQ")
        r.gap_bk = g;
      else
        r.gap_opt = g;
    }

    OfferMeans m;
    for (const Offer& o : e.report.solution.offers) m.add(o);
    if (m.count > 0) {
      r.mean_acceptance = m.acceptance / m.count;
      r.mean_compensation = m.compensation / m.count;
      r.mean_bundle_size = m.size / m.count;
      r.mean_detour = m.detour / m.count;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SensitivityRow> sensitivity_summary(const std::vector<SolvedInstance>& solved) {
  std::map<std::string, OfferMeans> groups;
  for (const SolvedInstance& s : solved)
    for (const Offer& o : s.solution->offers) groups[s.group].add(o);

  std::vector<SensitivityRow> rows;
  for (const auto& [group, m] : groups) {
    if (m.count == 0) continue;
    SensitivityRow r;
    r.group = group;
    r.offers = m.count;
    r.mean_acceptance = m.acceptance / m.count;
    r.mean_compensation = m.compensation / m.count;
    r.mean_bundle_size = m.size / m.count;
    r.mean_detour = m.detour / m.count;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string metrics_table(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "instance\tvariant\tobjective\tupper_bound\tgap_h\tgap_opt\tgap_bk\t"
         "mean_acceptance\tmean_compensation\tmean_bundle_size\tmean_detour\twall_time\n";
  for (const MetricsRow& r : rows) {
    out << r.instance << "\t" << r.variant << "\t" << format_real(r.objective) << "\t"
        << opt_text(r.upper_bound) << "\t" << opt_text(r.gap_h) << "\t" << opt_text(r.gap_opt)
        << "\t" << opt_text(r.gap_bk) << "\t" << opt_text(r.mean_acceptance) << "\t"
        << opt_text(r.mean_compensation) << "\t" << opt_text(r.mean_bundle_size) << "\t"
        << opt_text(r.mean_detour) << "\t" << format_real(r.wall_time) << "\n";
  }
  return out.str();
}

std::string sensitivity_table(const std::vector<SensitivityRow>& rows) {
  std::ostringstream out;
  out << "group\toffers\tmean_acceptance\tmean_compensation\tmean_bundle_size\tmean_detour\n";
  for (const SensitivityRow& r : rows) {
    out << r.group << "\t" << r.offers << "\t" << format_real(r.mean_acceptance) << "\t"
        << format_real(r.mean_compensation) << "\t" << format_real(r.mean_bundle_size) << "\t"
        << format_real(r.mean_detour) << "\n";
  }
  return out.str();
}

}  // namespace crowdship
