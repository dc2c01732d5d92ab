#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdship/model.hpp"
#include "crowdship/orchestrator.hpp"

namespace crowdship {

struct GeneratorConfig {
  int n_full_instances = 10;
  int full_tasks = 120;
  int full_drivers = 60;
  std::vector<int> task_sizes = {30, 60, 90, 120};
  std::vector<double> driver_ratios = {0.1, 0.2, 0.3, 0.4, 0.5};
  double region_half_width = 5.0;
  int load_min = 10;
  int load_max = 30;
  double capacity = 100.0;
  double outsource_cost = 4.95;
  std::uint64_t master_seed = 0;
};

// Table-2 behavioral classes, indexed 1..3.
BehaviorCoefficients class_coefficients(int class_tag);

// 10 full-scale bases x 8 class patterns x |task_sizes| x |driver_ratios|
// instances (1600 with the defaults). Pattern names: c1 c2 c3 (single class)
// and m1..m5 (mixed with equal class counts). Reduced instances take task and
// driver prefixes of their full-scale parent.
std::vector<Instance> generate_library(const GeneratorConfig& config);

// Single instance of the library, by base index, pattern index (0..7), task
// count and driver ratio. Cheaper than generating everything.
Instance generate_instance(const GeneratorConfig& config, int base_index, int pattern_index,
                           int num_tasks, double driver_ratio);

std::string pattern_name(int pattern_index);

struct MetricsRow {
  std::string instance;
  std::string variant;
  double objective = 0.0;
  std::optional<double> upper_bound;
  std::optional<double> gap_h;
  std::optional<double> gap_opt;
  std::optional<double> gap_bk;
  std::optional<double> mean_acceptance;
  std::optional<double> mean_compensation;
  std::optional<double> mean_bundle_size;
  std::optional<double> mean_detour;
  double wall_time = 0.0;
};

struct ReportEntry {
  std::string instance;
  std::string variant;
  RunReport report;
};

// gap_h from each report's own bounds; gap_opt / gap_bk against the reference
// objective for the same instance when available. Zero-valued references
// leave the gap absent.
std::vector<MetricsRow> compute_gaps(const std::vector<ReportEntry>& reports,
                                     const std::map<std::string, double>& reference_objectives);

// Mean per-offer metrics grouped by an instance-derived key.
struct SensitivityRow {
  std::string group;
  std::int64_t offers = 0;
  double mean_acceptance = 0.0;
  double mean_compensation = 0.0;
  double mean_bundle_size = 0.0;
  double mean_detour = 0.0;
};

struct SolvedInstance {
  const Instance* instance;
  const Solution* solution;
  std::string group;
};

std::vector<SensitivityRow> sensitivity_summary(const std::vector<SolvedInstance>& solved);

// Tab-separated table with one header line.
std::string metrics_table(const std::vector<MetricsRow>& rows);
std::string sensitivity_table(const std::vector<SensitivityRow>& rows);

}  // namespace crowdship
