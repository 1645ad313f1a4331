// Command-line surface for the solver library: equilibrium solves, d0
// sweeps, counterfactual scenario tables, calibration runs, randomized
// oracle audits and duopoly region maps.  All commands are deterministic
// given their configuration; CSVs carry a `# schema-version: 1` comment and
// identical reruns are byte-identical.
//
// Exit codes: 0 success, 2 invalid configuration, 3 solver failure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "powergame/powergame.hpp"

namespace pg = powergame;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// --instance / --params / --set resolution, precedence: --set over file over
// built-in registry.
struct ParamArgs {
  std::string instance;
  std::string params_file;
  std::vector<std::string> sets;
  std::optional<double> d0;
};

void add_param_options(CLI::App* cmd, ParamArgs& a, bool with_d0 = true) {
  cmd->add_option("--instance", a.instance, "registry instance (A, B, C or D)");
  cmd->add_option("--params", a.params_file, "parameter file (key = value lines)");
  cmd->add_option("--set", a.sets, "override, key=value in published table units")
      ->take_all();
  if (with_d0)
    cmd->add_option("--d0", a.d0, "baseline emission stock override (Gt CO2e)");
}

std::pair<std::string, double> parse_kv(const std::string& s) {
  const size_t eq = s.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("expected key=value, got '" + s + "'");
  const std::string key = s.substr(0, eq);
  const std::string val = s.substr(eq + 1);
  return {key, pg::detail::to_double(val, "override '" + s + "'")};
}

pg::ModelParams resolve_params(const ParamArgs& a) {
  pg::ModelParams p;
  bool have_base = false;
  if (!a.instance.empty()) {
    p = pg::build_instance(pg::instance_from_string(a.instance));
    have_base = true;
  }
  if (!a.params_file.empty()) {
    p = have_base ? pg::read_params_file(a.params_file, p)
                  : pg::read_params_file(a.params_file);
    have_base = true;
  }
  if (!have_base)
    throw std::invalid_argument("need --instance or --params");
  for (const std::string& s : a.sets) {
    const auto [key, val] = parse_kv(s);
    pg::apply_override(p, key, val);
  }
  if (a.d0) p.d0 = *a.d0;
  pg::validate(p);
  return p;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // '\n' endings on any platform
  if (!out) throw std::invalid_argument("cannot write " + path);
  return out;
}

int worker_count(int jobs, size_t tasks) {
  if (jobs <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    jobs = hw ? static_cast<int>(hw) : 4;
  }
  return std::max(1, std::min<int>(jobs, static_cast<int>(tasks)));
}

// ---------------------------------------------------------------------------

json equilibrium_json(const pg::Equilibrium& eq) {
  return json{{"x_star", eq.x_star},
              {"y_star_twh", eq.y_star},
              {"beta", eq.beta},
              {"energy_demand_twh", eq.demand},
              {"emissions_gt", eq.emissions},
              {"damages_gt", eq.damages},
              {"welfare_busd", eq.welfare},
              {"zone", pg::to_string(eq.zone)},
              {"regime", pg::to_string(eq.regime)},
              {"carbon_free", eq.carbon_free}};
}

int cmd_solve(const ParamArgs& args, const std::string& out_path) {
  const pg::ModelParams p = resolve_params(args);
  const pg::Equilibrium eq = pg::optimal_capacity(p);
  const pg::RegimeReport rep = pg::classify_regime(p);

  auto row = [](const char* label, const std::string& v) {
    std::printf("%-22s %s\n", label, v.c_str());
  };
  row("regime", pg::to_string(rep.regime));
  row("x*", num(eq.x_star));
  row("y* (TWh)", num(eq.y_star));
  row("beta", num(eq.beta));
  row("energy demand (TWh)", num(eq.demand));
  row("emissions (Gt)", num(eq.emissions));
  row("damages (Gt)", num(eq.damages));
  row("welfare (B$)", num(eq.welfare));
  row("zone", pg::to_string(eq.zone));
  row("carbon free", eq.carbon_free ? "yes" : "no");
  std::string cls = pg::to_string(rep.classification);
  if (std::isfinite(rep.d_bar))
    cls += " (d_bar = " + num(rep.d_bar) + " Gt)";
  row("classification", cls);
  row("theta/k (USD/kWh)", num(rep.margins.theta_over_k));
  row("decoupling bar", num(rep.margins.threshold_usd_per_kwh));

  if (!out_path.empty()) {
    json j{{"equilibrium", equilibrium_json(eq)},
           {"classification", pg::to_string(rep.classification)},
           {"d_bar_gt", std::isfinite(rep.d_bar) ? json(rep.d_bar) : json()},
           {"prop1a_holds", rep.margins.a_holds},
           {"prop1b_holds", rep.margins.b_holds},
           {"prop2i_holds", rep.prop2_i},
           {"theta_over_k_usd_per_kwh", rep.margins.theta_over_k},
           {"decoupling_threshold_usd_per_kwh", rep.margins.threshold_usd_per_kwh},
           {"params", {{"theta", p.theta}, {"lambda", p.lambda}, {"k", p.k},
                       {"alpha", p.alpha}, {"c_r", p.c_r}, {"c_f", p.c_f},
                       {"e_f_gt_per_twh", p.e_f}, {"d0_gt", p.d0}, {"b", p.b},
                       {"eta", p.eta}, {"xi_busd_per_gt", p.xi},
                       {"g", p.cost.g}, {"mu", p.cost.mu}}}};
    auto out = open_out(out_path);
    out << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_sweep(const ParamArgs& args, double d0_min, double d0_max, int steps,
              const std::string& out_path, int jobs) {
  if (!(d0_min >= 0.0) || !(d0_max >= d0_min) || steps < 1)
    throw std::invalid_argument("invalid d0 range/steps");
  pg::ModelParams p = resolve_params(args);
  if (d0_max == d0_min) steps = 1;  // zero-width range -> single row

  const std::vector<double> d0s = pg::numeric::linspace(d0_min, d0_max, steps);
  std::vector<pg::Equilibrium> rows(d0s.size());
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t i = next.fetch_add(1); i < d0s.size(); i = next.fetch_add(1)) {
      pg::ModelParams q = p;
      q.d0 = d0s[i];
      rows[i] = pg::optimal_capacity(q);
    }
  };
  std::vector<std::thread> pool;
  const int n_workers = worker_count(jobs, d0s.size());
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  std::ostringstream csv;
  csv << "# schema-version: 1\n";
  csv << "d0,x_star,y_star,energy_demand,beta,emissions,welfare,zone\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    const pg::Equilibrium& eq = rows[i];
    csv << num(d0s[i]) << ',' << num(eq.x_star) << ',' << num(eq.y_star) << ','
        << num(eq.demand) << ',' << num(eq.beta) << ',' << num(eq.emissions)
        << ',' << num(eq.welfare) << ',' << pg::to_string(eq.zone) << '\n';
  }
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].zone != rows[i - 1].zone)
      csv << "# threshold: zone " << pg::to_string(rows[i - 1].zone) << " -> "
          << pg::to_string(rows[i].zone) << " in d0=(" << num(d0s[i - 1]) << ","
          << num(d0s[i]) << "]\n";
    if (rows[i].carbon_free != rows[i - 1].carbon_free)
      csv << "# threshold: carbon-free " << (rows[i - 1].carbon_free ? "true" : "false")
          << " -> " << (rows[i].carbon_free ? "true" : "false") << " in d0=("
          << num(d0s[i - 1]) << "," << num(d0s[i]) << "]\n";
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    auto out = open_out(out_path);
    out << csv.str();
  }
  return 0;
}

int cmd_counterfactual(const ParamArgs& args, const std::vector<std::string>& scales,
                       const std::string& out_path) {
  const pg::ModelParams p = resolve_params(args);
  std::vector<std::pair<std::string, pg::ParamScale>> scenarios;
  for (const std::string& spec : scales) {
    pg::ParamScale sc;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
      const auto [key, val] = parse_kv(part);
      if (key == "k") sc.k = val;
      else if (key == "theta") sc.theta = val;
      else if (key == "g") sc.g = val;
      else if (key == "c_f") sc.c_f = val;
      else if (key == "d0") sc.d0 = val;
      else throw std::invalid_argument("unknown scale key '" + key + "'");
    }
    scenarios.emplace_back(spec, sc);
  }
  const auto table = pg::counterfactual_sweep(p, scenarios);

  std::ostringstream csv;
  csv << "# schema-version: 1\n";
  csv << "label,theta,k,d0,x_star,y_star,emissions,welfare,cost_reduction\n";
  for (const auto& row : table) {
    csv << row.label << ',' << num(row.params.theta) << ',' << num(row.params.k)
        << ',' << num(row.params.d0) << ',' << num(row.eq.x_star) << ','
        << num(row.eq.y_star) << ',' << num(row.eq.emissions) << ','
        << num(row.eq.welfare) << ','
        << (row.cost_reduction ? num(*row.cost_reduction) : "unattainable") << '\n';
  }
  std::cout << csv.str();
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    out << csv.str();
  }
  return 0;
}

int cmd_calibrate(const std::string& data_dir, const std::string& out_dir) {
  const pg::CalibrationReport rep = pg::run_calibration(data_dir);
  std::printf("%-8s %-10s %-10s %-10s %-10s\n", "region", "lambda", "theta",
              "c_f", "k");
  for (const auto& rc : rep.regions)
    std::printf("%-8s %-10s %-10s %-10s %-10s\n", rc.region.c_str(),
                num(rc.lambda).c_str(), num(rc.theta).c_str(), num(rc.c_f).c_str(),
                num(rc.k).c_str());
  std::printf("alpha = %s\nmu = %s\neta = %s\n", num(rep.alpha).c_str(),
              num(rep.mu).c_str(), num(rep.eta).c_str());
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, params] : rep.instances)
      pg::write_params_file(out_dir + "/" + name + ".params", params,
                            "fitted instance " + name);
    std::printf("wrote %zu parameter files to %s\n", rep.instances.size(),
                out_dir.c_str());
  }
  return 0;
}

int cmd_oracle_audit(unsigned seed, int instances, int grid_x, int grid_y) {
  pg::AuditConfig cfg;
  cfg.seed = seed;
  cfg.instances_per_regime = instances;
  cfg.grid.n_x = grid_x;
  cfg.grid.n_y = grid_y;
  const pg::AuditResult res = pg::run_oracle_audit(cfg);
  std::printf("instances              %d\n", res.instances);
  std::printf("best-response checks   %d (failures %d)\n", res.br_checks,
              res.br_failures);
  std::printf("policy checks          %d (failures %d, welfare-arm %d)\n",
              res.policy_checks, res.policy_failures, res.policy_welfare_arm);
  std::printf("max x error            %s\n", num(res.max_x_err).c_str());
  std::printf("max profit rel error   %s\n", num(res.max_profit_rel_err).c_str());
  std::printf("max y error (steps)    %s\n", num(res.max_y_err).c_str());
  std::printf("max welfare rel error  %s\n", num(res.max_welfare_rel_err).c_str());
  std::printf("RESULT: %s\n", res.pass ? "PASS" : "FAIL");
  return res.pass ? 0 : 3;
}

int cmd_duopoly_map(const ParamArgs& args, std::vector<double> thetas,
                    std::vector<double> lambdas, double d0, int n_grid,
                    const std::string& out_path, int jobs) {
  const pg::ModelParams base = resolve_params(args);
  if (thetas.empty()) thetas = {5.0, 15.0, 40.0, 90.0, 150.0, 200.0};
  if (lambdas.empty()) lambdas = {2.15, 2.35, 2.8, 3.3, 3.83};
  const auto cells = pg::duopoly_region_map(base, thetas, lambdas, d0, n_grid, jobs);

  std::ostringstream csv;
  csv << "# schema-version: 1\n";
  csv << "theta,lambda,region,x1,x2,y1,y2,coverage_share\n";
  int non_converged = 0;
  for (const auto& cell : cells) {
    const pg::DuopolyOutcome& o = cell.policy.outcome;
    if (!o.converged) ++non_converged;
    csv << num(cell.theta) << ',' << num(cell.lambda) << ','
        << pg::to_string(o.region) << ',' << num(o.x1) << ',' << num(o.x2) << ','
        << num(o.y1) << ',' << num(o.y2) << ',' << num(o.coverage_share) << '\n';
  }
  if (non_converged > 0)
    csv << "# non-converged-cells: " << non_converged << "\n";
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    auto out = open_out(out_path);
    out << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg solver for AI capability vs renewable capacity"};
  app.require_subcommand(1);

  ParamArgs solve_args;
  std::string solve_out;
  CLI::App* solve = app.add_subcommand("solve", "equilibrium for one instance");
  add_param_options(solve, solve_args);
  solve->add_option("--out", solve_out, "write JSON report to this path");

  ParamArgs sweep_args;
  double d0_min = 0.0, d0_max = 0.0;
  int sweep_steps = 101, sweep_jobs = 0;
  std::string sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "equilibrium vs baseline damages d0");
  add_param_options(sweep, sweep_args, false);
  sweep->add_option("--d0-min", d0_min, "range start (Gt)")->required();
  sweep->add_option("--d0-max", d0_max, "range end (Gt)")->required();
  sweep->add_option("--steps", sweep_steps, "number of rows (default 101)");
  sweep->add_option("--out", sweep_out, "CSV path (stdout if omitted)");
  sweep->add_option("--jobs", sweep_jobs, "worker threads (default: hardware)");

  ParamArgs cf_args;
  std::vector<std::string> cf_scales;
  std::string cf_out;
  CLI::App* cf = app.add_subcommand("counterfactual", "scaled-parameter scenario table");
  add_param_options(cf, cf_args);
  cf->add_option("--scale", cf_scales,
                 "scenario, comma-joined key=factor over {k,theta,g,c_f,d0}")
      ->take_all();
  cf->add_option("--out", cf_out, "also write CSV to this path");

  std::string cal_data = "data", cal_out;
  CLI::App* cal = app.add_subcommand("calibrate", "fit parameters from bundled tables");
  cal->add_option("--data", cal_data, "directory with the CSV fixtures");
  cal->add_option("--out", cal_out, "write fitted instance parameter files here");

  unsigned audit_seed = 12345;
  int audit_instances = 200, audit_gx = 20001, audit_gy = 4001;
  CLI::App* audit = app.add_subcommand("oracle-audit",
                                       "randomized closed-form vs grid-oracle audit");
  audit->add_option("--seed", audit_seed, "RNG seed (default 12345)");
  audit->add_option("--instances", audit_instances, "instances per regime (default 200)");
  audit->add_option("--grid-x", audit_gx, "oracle capability grid points");
  audit->add_option("--grid-y", audit_gy, "oracle capacity grid points");

  ParamArgs duo_args;
  std::vector<double> duo_thetas, duo_lambdas;
  double duo_d0 = 50.0;
  int duo_grid = 401, duo_jobs = 0;
  std::string duo_out;
  CLI::App* duo = app.add_subcommand("duopoly-map", "two-firm region map over (theta, lambda)");
  add_param_options(duo, duo_args, false);
  duo->add_option("--theta", duo_thetas, "theta grid values (default case-study grid)")
      ->take_all();
  duo->add_option("--lambda", duo_lambdas, "lambda grid values (default case-study grid)")
      ->take_all();
  duo->add_option("--d0", duo_d0, "baseline damages (Gt, default 50)");
  duo->add_option("--grid-x", duo_grid, "capability grid points (default 401)");
  duo->add_option("--out", duo_out, "CSV path (stdout if omitted)");
  duo->add_option("--jobs", duo_jobs, "worker threads (default: hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_args, solve_out);
    if (sweep->parsed())
      return cmd_sweep(sweep_args, d0_min, d0_max, sweep_steps, sweep_out, sweep_jobs);
    if (cf->parsed()) return cmd_counterfactual(cf_args, cf_scales, cf_out);
    if (cal->parsed()) return cmd_calibrate(cal_data, cal_out);
    if (audit->parsed())
      return cmd_oracle_audit(audit_seed, audit_instances, audit_gx, audit_gy);
    if (duo->parsed())
      return cmd_duopoly_map(duo_args, duo_thetas, duo_lambdas, duo_d0, duo_grid,
                             duo_out, duo_jobs);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
