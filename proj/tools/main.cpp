#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "crowdship/bench.hpp"
#include "crowdship/model.hpp"
#include "crowdship/oracle.hpp"
#include "crowdship/orchestrator.hpp"

namespace fs = std::filesystem;
using namespace crowdship;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << content;
  if (!f) throw IoError("write failed: " + path);
}

// Parses a report file written by format_report back into a RunReport.
RunReport parse_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "CROWDSHIP-REPORT v1")
    throw ParseError(path + ": expected header 'CROWDSHIP-REPORT v1'");

  RunReport rep;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "status") {
      std::string v;
      ss >> v;
      rep.status = solve_status_from_string(v);
      rep.solution.status = rep.status;
    } else if (key == "objective") {
      ss >> rep.solution.objective;
    } else if (key == "bound") {
      std::string v;
      ss >> v;
      if (v != "none") rep.upper_bound = std::stod(v);
    } else if (key == "lower_bound") {
      ss >> rep.lower_bound;
    } else if (key == "gap_h") {
      std::string v;
      ss >> v;
      if (v != "none") rep.gap_h = std::stod(v);
    } else if (key == "columns_generated") {
      ss >> rep.columns_generated;
    } else if (key == "cg_iterations") {
      ss >> rep.cg_iterations;
    } else if (key == "wall_time_seconds") {
      ss >> rep.wall_time_seconds;
    } else if (key == "offers") {
      // count line; offers follow
    } else if (key == "offer") {
      Offer o;
      std::string tasks;
      if (!(ss >> o.driver_id >> o.bundle.depot_id >> tasks >> o.compensation >>
            o.acceptance_probability >> o.expected_savings >> o.detour))
        throw ParseError(path + ": malformed offer line");
      std::istringstream items(tasks);
      std::string tok;
      while (std::getline(items, tok, ',')) o.bundle.task_order.push_back(std::stoi(tok));
      rep.solution.offers.push_back(std::move(o));
    } else {
      throw ParseError(path + ": unknown report key '" + key + "'");
    }
  }
  if (rep.upper_bound) rep.solution.bound = rep.upper_bound;
  return rep;
}

// Tab-separated lines, each with exactly `fields` columns.
std::vector<std::vector<std::string>> read_tsv(const std::string& path, std::size_t fields) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, '\t')) cols.push_back(tok);
    if (cols.size() != fields)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(fields) + " tab-separated fields");
    rows.push_back(std::move(cols));
  }
  return rows;
}

void emit(const std::string& out_path, const std::string& table) {
  if (out_path.empty())
    std::cout << table;
  else
    write_file(out_path, table);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdship: bundle construction, assignment and compensation solver"};
  app.require_subcommand(1);

  // --- generate ---
  auto* gen = app.add_subcommand("generate", "Generate the benchmark instance library");
  std::string gen_out_dir;
  GeneratorConfig gcfg;
  gen->add_option("--out-dir", gen_out_dir, "Directory for instance files")->required();
  gen->add_option("--master-seed", gcfg.master_seed, "Master RNG seed");
  gen->add_option("--bases", gcfg.n_full_instances, "Number of full-scale base instances");
  gen->add_option("--full-tasks", gcfg.full_tasks, "Tasks per full-scale instance");
  gen->add_option("--full-drivers", gcfg.full_drivers, "Drivers per full-scale instance");
  gen->add_option("--task-sizes", gcfg.task_sizes, "Reduced task counts");
  gen->add_option("--ratios", gcfg.driver_ratios, "Driver-to-task ratios");
  gen->add_option("--half-width", gcfg.region_half_width, "Half-width of the square region");
  gen->add_option("--load-min", gcfg.load_min, "Minimum task load");
  gen->add_option("--load-max", gcfg.load_max, "Maximum task load");
  gen->add_option("--capacity", gcfg.capacity, "Driver capacity");
  gen->add_option("--cost", gcfg.outsource_cost, "Third-party cost per task");

  // --- solve ---
  auto* solve = app.add_subcommand("solve", "Solve one instance with a chosen variant");
  std::string sv_variant = "e-dd", sv_instance, sv_out, sv_report;
  bool sv_timing = false;
  VariantConfig vcfg;
  solve->add_option("--variant", sv_variant, "One of h-b h-d h-dd h-ddc h-c e-dd e-ddc seq");
  solve->add_option("--instance", sv_instance, "Instance file")->required();
  solve->add_option("--out", sv_out, "Solution output file");
  solve->add_option("--report", sv_report, "Report output file");
  solve->add_option("--time-limit", vcfg.time_limit_seconds, "Wall-clock limit in seconds");
  solve->add_option("--theta", vcfg.theta_degrees, "Corridor half-angle in degrees");
  solve->add_option("--col-limit", vcfg.column_limit, "Columns per driver per iteration");
  solve->add_option("--seed", vcfg.rng_seed, "RNG seed (sequential baseline)");
  solve->add_option("--workers", vcfg.workers, "Concurrent pricing workers");
  solve->add_option("--pool-cap", vcfg.pool_cap, "Enumeration pool size cap");
  solve->add_flag("--timing", sv_timing, "Include wall time in the report file");

  // --- gaps ---
  auto* gaps = app.add_subcommand("gaps", "Metrics table from solver reports");
  std::string gp_inputs, gp_refs, gp_out;
  gaps->add_option("--inputs", gp_inputs, "TSV manifest: instance<TAB>variant<TAB>report-file")
      ->required();
  gaps->add_option("--refs", gp_refs, "TSV reference objectives: instance<TAB>objective");
  gaps->add_option("--out", gp_out, "Output table file (stdout when omitted)");

  // --- sensitivity ---
  auto* sens = app.add_subcommand("sensitivity", "Per-offer metric means by group");
  std::string sn_inputs, sn_out;
  sens->add_option("--inputs", sn_inputs,
                   "TSV manifest: group<TAB>instance-file<TAB>solution-file")
      ->required();
  sens->add_option("--out", sn_out, "Output table file (stdout when omitted)");

  // --- oracle ---
  auto* orc = app.add_subcommand("oracle", "Exhaustive reference optimum (tiny instances only)");
  std::string or_instance, or_out;
  orc->add_option("--instance", or_instance, "Instance file")->required();
  orc->add_option("--out", or_out, "Solution output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      fs::create_directories(gen_out_dir);
      long count = 0;
      for (int base = 0; base < gcfg.n_full_instances; ++base)
        for (int pattern = 0; pattern < 8; ++pattern)
          for (int m : gcfg.task_sizes)
            for (double p : gcfg.driver_ratios) {
              Instance inst = generate_instance(gcfg, base, pattern, m, p);
              save_instance(inst, (fs::path(gen_out_dir) / (inst.name + ".txt")).string());
              ++count;
            }
      std::cout << "wrote " << count << " instances to " << gen_out_dir << "\n";
      return 0;
    }

    if (*solve) {
      Instance inst = load_instance(sv_instance);
      vcfg.variant = variant_from_string(sv_variant);
      RunReport rep = run_variant(inst, vcfg);
      if (!sv_out.empty()) save_solution(rep.solution, sv_out);
      if (!sv_report.empty()) write_file(sv_report, format_report(rep, sv_timing));
      std::cout << "status " << to_string(rep.status) << " objective "
                << format_real(rep.solution.objective);
      if (rep.upper_bound) std::cout << " bound " << format_real(*rep.upper_bound);
      std::cout << "\n";
      return rep.status == SolveStatus::time_limit ? 3 : 0;
    }

    if (*gaps) {
      std::vector<ReportEntry> entries;
      for (auto& row : read_tsv(gp_inputs, 3))
        entries.push_back({row[0], row[1], parse_report(row[2])});
      std::map<std::string, double> refs;
      if (!gp_refs.empty())
        for (auto& row : read_tsv(gp_refs, 2)) refs[row[0]] = std::stod(row[1]);
      emit(gp_out, metrics_table(compute_gaps(entries, refs)));
      return 0;
    }

    if (*sens) {
      std::vector<Instance> instances;
      std::vector<Solution> solutions;
      std::vector<std::string> groups;
      for (auto& row : read_tsv(sn_inputs, 3)) {
        groups.push_back(row[0]);
        instances.push_back(load_instance(row[1]));
        solutions.push_back(load_solution(row[2]));
      }
      std::vector<SolvedInstance> solved;
      for (std::size_t i = 0; i < groups.size(); ++i)
        solved.push_back({&instances[i], &solutions[i], groups[i]});
      emit(sn_out, sensitivity_table(sensitivity_summary(solved)));
      return 0;
    }

    if (*orc) {
      Instance inst = load_instance(or_instance);
      Solution sol = oracle_solve(inst);
      if (!or_out.empty()) save_solution(sol, or_out);
      std::cout << format_real(sol.objective) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
