#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crowdship/model.hpp"
#include "crowdship/pricing.hpp"

namespace crowdship {

enum class Variant { h_b, h_d, h_dd, h_ddc, h_c, e_dd, e_ddc, seq };

Variant variant_from_string(const std::string& name);  // case-insensitive
std::string to_string(Variant v);

struct VariantConfig {
  Variant variant = Variant::e_dd;
  double theta_degrees = 36.0;
  int column_limit = 100;
  double time_limit_seconds = std::numeric_limits<double>::infinity();
  std::uint64_t rng_seed = 0;
  int workers = 1;
  std::size_t pool_cap = 5'000'000;

  bool use_dominance() const;
  bool use_detour_limit() const;
  bool use_corridor_init() const;
  bool do_enumeration() const;
};

struct RunReport {
  Solution solution;
  std::optional<double> upper_bound;  // UB_CG, only at natural termination
  double lower_bound = 0.0;
  std::optional<double> gap_h;
  std::int64_t columns_generated = 0;
  int cg_iterations = 0;
  double wall_time_seconds = 0.0;
  SolveStatus status = SolveStatus::heuristic;
};

struct ColumnGenResult {
  std::vector<Column> columns;
  std::optional<double> upper_bound;
  DualPrices duals;
  int iterations = 0;
  bool hit_time_limit = false;
};

// Solves the LP relaxation of the set-packing master by column generation.
// `seed_columns` warm-starts the pool (corridor heuristic); `restrict` limits
// pricing to per-driver task subsets and suppresses the upper bound.
ColumnGenResult column_generation(const Instance& instance, const VariantConfig& config,
                                  std::vector<Column> seed_columns = {},
                                  bool corridor_restricted = false,
                                  double deadline_seconds = std::numeric_limits<double>::infinity());

Solution milp_heuristic(const Instance& instance, const std::vector<Column>& columns,
                        double time_limit_seconds);

Solution enumerate_and_reoptimize(const Instance& instance, std::vector<Column> columns,
                                  double upper_bound, double lower_bound, const DualPrices& duals,
                                  const VariantConfig& config, double deadline_seconds);

// Column generation restricted to each driver's corridor, run to natural
// termination. The restricted LP value is not a valid global upper bound.
std::vector<Column> corridor_warm_start(const Instance& instance, const VariantConfig& config,
                                        double deadline_seconds);

RunReport run_variant(const Instance& instance, const VariantConfig& config);

RunReport sequential_baseline(const Instance& instance, const VariantConfig& config);

// Flat key-value block plus one line per offer. wall_time_seconds is included
// only when `include_timing` is set so that report files are reproducible.
std::string format_report(const RunReport& report, bool include_timing = false);

}  // namespace crowdship
