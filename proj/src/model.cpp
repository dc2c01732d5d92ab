#include "crowdship/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crowdship/geometry.hpp"
#include "crowdship/probability.hpp"

namespace crowdship {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::heuristic: return "heuristic";
    case SolveStatus::time_limit: return "time_limit";
  }
  return "heuristic";
}

SolveStatus solve_status_from_string(const std::string& s) {
  if (s == "optimal") return SolveStatus::optimal;
  if (s == "heuristic") return SolveStatus::heuristic;
  if (s == "time_limit") return SolveStatus::time_limit;
  throw ParseError("unknown solution status: " + s);
}

const TaskSpec& Instance::task(int id) const {
  auto it = task_index_.find(id);
  if (it == task_index_.end()) throw ValidationError("unknown task id " + std::to_string(id));
  return tasks[it->second];
}

const DepotSpec& Instance::depot(int id) const {
  auto it = depot_index_.find(id);
  if (it == depot_index_.end()) throw ValidationError("unknown depot id " + std::to_string(id));
  return depots[it->second];
}

const DriverSpec& Instance::driver(int id) const {
  auto it = driver_index_.find(id);
  if (it == driver_index_.end()) throw ValidationError("unknown driver id " + std::to_string(id));
  return drivers[it->second];
}

void Instance::finalize() {
  task_index_.clear();
  depot_index_.clear();
  driver_index_.clear();

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const TaskSpec& t = tasks[i];
    if (!std::isfinite(t.location.x) || !std::isfinite(t.location.y))
      throw ValidationError("task " + std::to_string(t.id) + ": non-finite location");
    if (!(t.load > 0.0)) throw ValidationError("task " + std::to_string(t.id) + ": load must be > 0");
    if (!(t.outsource_cost > 0.0))
      throw ValidationError("task " + std::to_string(t.id) + ": outsource_cost must be > 0");
    if (!task_index_.emplace(t.id, i).second)
      throw ValidationError("duplicate task id " + std::to_string(t.id));
  }
  std::set<int> covered;
  for (std::size_t i = 0; i < depots.size(); ++i) {
    const DepotSpec& d = depots[i];
    if (!std::isfinite(d.location.x) || !std::isfinite(d.location.y))
      throw ValidationError("depot " + std::to_string(d.id) + ": non-finite location");
    if (!depot_index_.emplace(d.id, i).second)
      throw ValidationError("duplicate depot id " + std::to_string(d.id));
    for (int tid : d.servable_tasks) {
      if (task_index_.find(tid) == task_index_.end())
        throw ValidationError("depot " + std::to_string(d.id) + ": servable task " +
                              std::to_string(tid) + " does not exist");
      covered.insert(tid);
    }
  }
  for (const TaskSpec& t : tasks)
    if (covered.find(t.id) == covered.end())
      throw ValidationError("task " + std::to_string(t.id) + " is served by no depot");
  for (std::size_t i = 0; i < drivers.size(); ++i) {
    const DriverSpec& w = drivers[i];
    if (!(w.capacity > 0.0))
      throw ValidationError("driver " + std::to_string(w.id) + ": capacity must be > 0");
    const BehaviorCoefficients& b = w.behavior;
    if (!(b.compensation_coeff > 0.0))
      throw ValidationError("driver " + std::to_string(w.id) + ": compensation_coeff must be > 0");
    if (b.detour_coeff > 0.0)
      throw ValidationError("driver " + std::to_string(w.id) + ": detour_coeff must be <= 0");
    if (b.size_coeff > 0.0)
      throw ValidationError("driver " + std::to_string(w.id) + ": size_coeff must be <= 0");
    if (b.driver_coeffs.size() != b.driver_values.size())
      throw ValidationError("driver " + std::to_string(w.id) +
                            ": driver_coeffs and driver_values length mismatch");
    if (!driver_index_.emplace(w.id, i).second)
      throw ValidationError("duplicate driver id " + std::to_string(w.id));
  }
}

namespace {

struct LineReader {
  std::istream& in;
  std::string path;
  int line_no = 0;

  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(path + ":" + std::to_string(line_no) + ": " + msg);
  }
};

double parse_real(LineReader& r, std::istringstream& ss, const char* field) {
  double v;
  if (!(ss >> v)) r.fail(std::string("expected real for field '") + field + "'");
  return v;
}

int parse_int(LineReader& r, std::istringstream& ss, const char* field) {
  int v;
  if (!(ss >> v)) r.fail(std::string("expected integer for field '") + field + "'");
  return v;
}

}  // namespace

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open instance file: " + path);
  LineReader r{in, path};
  std::string line;

  if (!r.next(line) || line != "CROWDSHIP-INSTANCE v1") r.fail("expected header 'CROWDSHIP-INSTANCE v1'");

  Instance inst;
  if (!r.next(line) || line.rfind("NAME ", 0) != 0) r.fail("expected 'NAME <text>'");
  inst.name = line.substr(5);

  if (!r.next(line) || line.rfind("SEED ", 0) != 0) r.fail("expected 'SEED <int|none>'");
  {
    std::string v = line.substr(5);
    if (v != "none") {
      try {
        inst.seed = std::stoll(v);
      } catch (const std::exception&) {
        r.fail("bad SEED value: " + v);
      }
    }
  }

  if (!r.next(line) || line.rfind("DEPOTS ", 0) != 0) r.fail("expected 'DEPOTS <count>'");
  int n_depots = std::stoi(line.substr(7));
  struct PendingDepot {
    DepotSpec depot;
    bool all = false;
  };
  std::vector<PendingDepot> pending;
  for (int i = 0; i < n_depots; ++i) {
    if (!r.next(line)) r.fail("unexpected end of file in DEPOTS section");
    std::istringstream ss(line);
    PendingDepot pd;
    pd.depot.id = parse_int(r, ss, "depot id");
    pd.depot.location.x = parse_real(r, ss, "depot x");
    pd.depot.location.y = parse_real(r, ss, "depot y");
    std::string serv;
    if (!(ss >> serv)) r.fail("expected servable task list or ALL");
    if (serv == "ALL") {
      pd.all = true;
    } else if (serv == "NONE") {
      // empty servable set
    } else {
      std::istringstream items(serv);
      std::string tok;
      while (std::getline(items, tok, ',')) {
        try {
          pd.depot.servable_tasks.insert(std::stoi(tok));
        } catch (const std::exception&) {
          r.fail("bad task id in servable list: " + tok);
        }
      }
    }
    pending.push_back(std::move(pd));
  }

  if (!r.next(line) || line.rfind("TASKS ", 0) != 0) r.fail("expected 'TASKS <count>'");
  int n_tasks = std::stoi(line.substr(6));
  for (int i = 0; i < n_tasks; ++i) {
    if (!r.next(line)) r.fail("unexpected end of file in TASKS section");
    std::istringstream ss(line);
    TaskSpec t;
    t.id = parse_int(r, ss, "task id");
    t.location.x = parse_real(r, ss, "task x");
    t.location.y = parse_real(r, ss, "task y");
    t.load = parse_real(r, ss, "task load");
    t.outsource_cost = parse_real(r, ss, "task cost");
    inst.tasks.push_back(t);
  }

  if (!r.next(line) || line.rfind("DRIVERS ", 0) != 0) r.fail("expected 'DRIVERS <count>'");
  int n_drivers = std::stoi(line.substr(8));
  for (int i = 0; i < n_drivers; ++i) {
    if (!r.next(line)) r.fail("unexpected end of file in DRIVERS section");
    std::istringstream ss(line);
    DriverSpec w;
    w.id = parse_int(r, ss, "driver id");
    w.origin.x = parse_real(r, ss, "driver sx");
    w.origin.y = parse_real(r, ss, "driver sy");
    w.destination.x = parse_real(r, ss, "driver ex");
    w.destination.y = parse_real(r, ss, "driver ey");
    w.capacity = parse_real(r, ss, "driver capacity");
    w.behavior.intercept = parse_real(r, ss, "alpha");
    w.behavior.detour_coeff = parse_real(r, ss, "beta1");
    w.behavior.size_coeff = parse_real(r, ss, "beta2");
    w.behavior.compensation_coeff = parse_real(r, ss, "gamma");
    int tag;
    if (ss >> tag) {
      if (tag < 1 || tag > 3) r.fail("class_tag must be in {1,2,3}");
      w.class_tag = tag;
    }
    inst.drivers.push_back(std::move(w));
  }

  for (PendingDepot& pd : pending) {
    if (pd.all)
      for (const TaskSpec& t : inst.tasks) pd.depot.servable_tasks.insert(t.id);
    inst.depots.push_back(std::move(pd.depot));
  }

  inst.finalize();
  return inst;
}

void save_instance(const Instance& instance, const std::string& path) {
  std::ostringstream out;
  out << "CROWDSHIP-INSTANCE v1\n";
  out << "NAME " << instance.name << "\n";
  out << "SEED " << (instance.seed ? std::to_string(*instance.seed) : std::string("none")) << "\n";
  out << "DEPOTS " << instance.depots.size() << "\n";
  for (const DepotSpec& d : instance.depots) {
    out << d.id << " " << format_real(d.location.x) << " " << format_real(d.location.y) << " ";
    if (d.servable_tasks.size() == instance.tasks.size()) {
      out << "ALL";
    } else {
      bool first = true;
      for (int tid : d.servable_tasks) {
        if (!first) out << ",";
        out << tid;
        first = false;
      }
      if (first) out << "NONE";
    }
    out << "\n";
  }
  out << "TASKS " << instance.tasks.size() << "\n";
  for (const TaskSpec& t : instance.tasks) {
    out << t.id << " " << format_real(t.location.x) << " " << format_real(t.location.y) << " "
        << format_real(t.load) << " " << format_real(t.outsource_cost) << "\n";
  }
  out << "DRIVERS " << instance.drivers.size() << "\n";
  for (const DriverSpec& w : instance.drivers) {
    out << w.id << " " << format_real(w.origin.x) << " " << format_real(w.origin.y) << " "
        << format_real(w.destination.x) << " " << format_real(w.destination.y) << " "
        << format_real(w.capacity) << " " << format_real(w.behavior.intercept) << " "
        << format_real(w.behavior.detour_coeff) << " " << format_real(w.behavior.size_coeff) << " "
        << format_real(w.behavior.compensation_coeff);
    if (w.class_tag) out << " " << *w.class_tag;
    out << "\n";
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << out.str();
  if (!f) throw IoError("write failed: " + path);
}

Solution load_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open solution file: " + path);
  LineReader r{in, path};
  std::string line;

  if (!r.next(line) || line != "CROWDSHIP-SOLUTION v1") r.fail("expected header 'CROWDSHIP-SOLUTION v1'");
  Solution sol;
  if (!r.next(line) || line.rfind("OBJECTIVE ", 0) != 0) r.fail("expected 'OBJECTIVE <real>'");
  sol.objective = std::stod(line.substr(10));
  if (!r.next(line) || line.rfind("BOUND ", 0) != 0) r.fail("expected 'BOUND <real|none>'");
  {
    std::string v = line.substr(6);
    if (v != "none") sol.bound = std::stod(v);
  }
  if (!r.next(line) || line.rfind("STATUS ", 0) != 0) r.fail("expected 'STATUS <word>'");
  sol.status = solve_status_from_string(line.substr(7));

  while (r.next(line)) {
    std::istringstream ss(line);
    Offer o;
    o.driver_id = parse_int(r, ss, "driver id");
    o.bundle.depot_id = parse_int(r, ss, "depot id");
    std::string tasks;
    if (!(ss >> tasks)) r.fail("expected task list");
    std::istringstream items(tasks);
    std::string tok;
    while (std::getline(items, tok, ',')) o.bundle.task_order.push_back(std::stoi(tok));
    o.compensation = parse_real(r, ss, "compensation");
    o.acceptance_probability = parse_real(r, ss, "acceptance probability");
    o.expected_savings = parse_real(r, ss, "expected savings");
    o.detour = parse_real(r, ss, "detour");
    sol.offers.push_back(std::move(o));
  }
  return sol;
}

void save_solution(const Solution& solution, const std::string& path) {
  std::ostringstream out;
  out << "CROWDSHIP-SOLUTION v1\n";
  out << "OBJECTIVE " << format_real(solution.objective) << "\n";
  out << "BOUND " << (solution.bound ? format_real(*solution.bound) : std::string("none")) << "\n";
  out << "STATUS " << to_string(solution.status) << "\n";
  for (const Offer& o : solution.offers) {
    out << o.driver_id << " " << o.bundle.depot_id << " ";
    for (std::size_t i = 0; i < o.bundle.task_order.size(); ++i) {
      if (i) out << ",";
      out << o.bundle.task_order[i];
    }
    out << " " << format_real(o.compensation) << " " << format_real(o.acceptance_probability)
        << " " << format_real(o.expected_savings) << " " << format_real(o.detour) << "\n";
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << out.str();
  if (!f) throw IoError("write failed: " + path);
}

ValidationReport validate_solution(const Instance& instance, const Solution& solution) {
  ValidationReport report;
  auto add = [&](const std::string& s) { report.violations.push_back(s); };

  std::set<int> seen_tasks;
  std::set<int> seen_drivers;
  double total = 0.0;
  for (const Offer& o : solution.offers) {
    std::string tag = "offer driver=" + std::to_string(o.driver_id) + ": ";
    const DriverSpec* driver = nullptr;
    try {
      driver = &instance.driver(o.driver_id);
    } catch (const ValidationError&) {
      add(tag + "unknown driver id");
      continue;
    }
    if (!seen_drivers.insert(o.driver_id).second) add(tag + "driver appears in multiple offers");

    const DepotSpec* depot = nullptr;
    try {
      depot = &instance.depot(o.bundle.depot_id);
    } catch (const ValidationError&) {
      add(tag + "unknown depot id " + std::to_string(o.bundle.depot_id));
    }

    if (o.bundle.task_order.empty()) add(tag + "empty bundle");
    double load = 0.0;
    double outsource_total = 0.0;
    std::set<int> in_bundle;
    bool tasks_ok = true;
    for (int tid : o.bundle.task_order) {
      if (!instance.has_task(tid)) {
        add(tag + "unknown task id " + std::to_string(tid));
        tasks_ok = false;
        continue;
      }
      if (!in_bundle.insert(tid).second) add(tag + "task " + std::to_string(tid) + " repeated in bundle");
      if (!seen_tasks.insert(tid).second)
        add(tag + "task " + std::to_string(tid) + " appears in multiple offers");
      if (depot && depot->servable_tasks.find(tid) == depot->servable_tasks.end())
        add(tag + "task " + std::to_string(tid) + " not servable from depot " +
            std::to_string(o.bundle.depot_id));
      load += instance.task(tid).load;
      outsource_total += instance.task(tid).outsource_cost;
    }
    if (load > driver->capacity + 1e-9)
      add(tag + "capacity exceeded (" + format_real(load) + " > " + format_real(driver->capacity) + ")");

    if (tasks_ok && depot && !o.bundle.task_order.empty()) {
      PredictorVector x;
      x.detour = bundle_detour(instance, *driver, o.bundle);
      x.bundle_size = static_cast<double>(o.bundle.task_order.size());
      double p = acceptance_probability(driver->behavior, x, o.compensation);
      if (std::abs(p - o.acceptance_probability) > 1e-9)
        add(tag + "acceptance probability mismatch (stored " + format_real(o.acceptance_probability) +
            ", recomputed " + format_real(p) + ")");
      double es = expected_savings(p, outsource_total, o.compensation);
      if (std::abs(es - o.expected_savings) > 1e-9)
        add(tag + "expected savings mismatch (stored " + format_real(o.expected_savings) +
            ", recomputed " + format_real(es) + ")");
    }
    total += o.expected_savings;
  }
  if (std::abs(total - solution.objective) > 1e-9)
    add("objective mismatch: stored " + format_real(solution.objective) + ", sum of offers " +
        format_real(total));
  return report;
}

}  // namespace crowdship
