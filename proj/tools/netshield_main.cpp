// Command-line front end: builds a network model, picks the centrality that
// matches the requested objective, solves for the optimal protections and
// verifies them, sweeps budgets, or cross-checks the solver against the
// independent oracles.
//
// Exit codes: 0 success, 1 input error, 2 infeasible budget (C < sqrt(n)),
// 3 verification failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netshield/centrality.hpp"
#include "netshield/io.hpp"
#include "netshield/model.hpp"
#include "netshield/oracle.hpp"
#include "netshield/waterfill.hpp"

namespace {

using namespace netshield;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitVerification = 3;

struct RunConfig {
  std::string model;
  double beta = 0.5;
  std::string rho_file;
  std::string objective;
  std::optional<double> budget;
  std::string budget_grid;
  std::string input;
  std::string output;
  std::uint64_t seed = 12345;
  std::vector<std::string> oracles;
  bool one_based = false;
  int leaves = 0;
  std::string format = "json";
  double grid_resolution = 0.005;
  int subgrad_iters = 100000;
  int mc_samples = 100000;
  std::string q_output;
};

/// Prefixes any failure with the pipeline stage that raised it. The budget
/// infeasibility type is preserved so main can map it to exit code 2.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InfeasibleBudget& e) {
    throw InfeasibleBudget(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string(name) + ": " + e.what());
  }
}

Matrix load_square_input(const std::string& path, bool one_based) {
  std::ifstream probe(path);
  if (!probe) throw std::invalid_argument("cannot open '" + path + "'");
  std::string first_line;
  std::getline(probe, first_line);
  probe.close();
  if (first_line.rfind("src", 0) == 0)
    return read_edge_list_file(path, one_based, /*directed=*/true).adjacency();
  return read_io_matrix_file(path);
}

Vector load_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      auto t = field.find_first_not_of(" \t\r");
      if (t == std::string::npos) continue;
      values.push_back(std::stod(field));
    }
  }
  Vector v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) v(i) = values[i];
  return v;
}

NetworkModel build_model(const RunConfig& cfg) {
  if (cfg.model == "star") {
    if (cfg.leaves < 2)
      throw std::invalid_argument("star model needs --leaves >= 2");
    Matrix p = normalize_rows(make_star_graph(cfg.leaves).adjacency());
    return build_production(cfg.beta, p);
  }
  if (cfg.input.empty())
    throw std::invalid_argument("--input is required for model '" + cfg.model + "'");
  Matrix m = load_square_input(cfg.input, cfg.one_based);
  if (cfg.model == "production") return build_production(cfg.beta, normalize_rows(m));
  if (cfg.model == "quadratic") return build_quadratic(cfg.beta, m);
  if (cfg.model == "coordination") {
    if (cfg.rho_file.empty())
      throw std::invalid_argument("coordination model needs --rho-file");
    Vector rho = load_vector(cfg.rho_file);
    return build_coordination(m, rho);
  }
  if (cfg.model == "raw") return build_raw(m);
  throw std::invalid_argument("unknown model '" + cfg.model + "'");
}

CentralityVector pick_centrality(const RunConfig& cfg, const InfluenceOperator& op) {
  // total-variance risk is weighted by ell, mean-variance risk by v
  if (cfg.objective == "total-var") return ell_centrality(op);
  if (cfg.objective == "mean-var") return bonacich_centrality(op);
  throw std::invalid_argument("--objective must be total-var or mean-var");
}

std::string resolve_output(const RunConfig& cfg, const std::string& default_name) {
  if (!cfg.output.empty()) return cfg.output;
  if (const char* dir = std::getenv("NETSHIELD_OUTPUT_DIR"))
    return (std::filesystem::path(dir) / default_name).string();
  return default_name;
}

double require_budget(const RunConfig& cfg) {
  if (!cfg.budget.has_value() || !cfg.budget_grid.empty())
    throw std::invalid_argument("exactly one budget is required here: use --budget");
  return *cfg.budget;
}

std::vector<double> resolve_grid(const RunConfig& cfg, int n) {
  if (cfg.budget.has_value())
    throw std::invalid_argument("sweep takes --budget-grid, not --budget");
  if (cfg.budget_grid.empty()) {
    double lo = std::sqrt(static_cast<double>(n));
    return make_budget_grid(lo, static_cast<double>(n), 50, /*log_spacing=*/true);
  }
  std::vector<std::string> parts;
  std::stringstream ss(cfg.budget_grid);
  std::string field;
  while (std::getline(ss, field, ':')) parts.push_back(field);
  if (parts.size() < 3 || parts.size() > 4)
    throw std::invalid_argument("--budget-grid wants min:max:points[:log]");
  bool log_spacing = parts.size() == 4;
  if (log_spacing && parts[3] != "log")
    throw std::invalid_argument("--budget-grid: trailing token must be 'log'");
  return make_budget_grid(std::stod(parts[0]), std::stod(parts[1]),
                          std::stoi(parts[2]), log_spacing);
}

int cmd_solve(const RunConfig& cfg) {
  double budget = require_budget(cfg);
  NetworkModel model = stage("model", [&] { return build_model(cfg); });
  InfluenceOperator op = stage("influence", [&] { return influence(model); });
  CentralityVector y = stage("centrality", [&] { return pick_centrality(cfg, op); });
  ProtectionSolution sol = stage("solve", [&] { return solve(y, budget); });
  KKTCertificate cert =
      stage("kkt", [&] { return kkt_verify(y, sol, 1e-9); });
  if (!cert.valid) {
    std::cerr << "kkt: certificate invalid, max violation " << cert.max_violation
              << " in '" << cert.worst_condition << "'\n";
    return kExitVerification;
  }
  SolutionFormat format =
      cfg.format == "csv" ? SolutionFormat::csv : SolutionFormat::json;
  std::string path = resolve_output(
      cfg, cfg.format == "csv" ? "solution.csv" : "solution.json");
  stage("output", [&] {
    atomic_write_file(path, [&](std::ostream& out) {
      write_solution(out, sol, y, {}, format);
    });
    return 0;
  });
  std::cout << "lambda_star=" << detail::format_double(sol.lambda_star)
            << " regime=" << to_string(sol.regime) << " k_active=" << sol.k_active
            << " kkt_max_violation=" << cert.max_violation << " -> " << path
            << "\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg) {
  NetworkModel model = stage("model", [&] { return build_model(cfg); });
  InfluenceOperator op = stage("influence", [&] { return influence(model); });
  CentralityVector y = stage("centrality", [&] { return pick_centrality(cfg, op); });
  std::vector<double> grid =
      stage("grid", [&] { return resolve_grid(cfg, model.n); });
  SweepResult sweep = stage("solve", [&] { return budget_sweep(y, grid); });
  std::string path = resolve_output(cfg, "sweep.csv");
  stage("output", [&] {
    atomic_write_file(path,
                      [&](std::ostream& out) { write_sweep(out, sweep.rows); });
    if (!cfg.q_output.empty())
      atomic_write_file(cfg.q_output, [&](std::ostream& out) {
        write_q_trajectories(out, sweep.rows, sweep.q_per_budget);
      });
    return 0;
  });
  std::cout << "sweep rows=" << sweep.rows.size() << " -> " << path << "\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  double budget = require_budget(cfg);
  if (cfg.oracles.empty())
    throw std::invalid_argument("verify needs --verify with grid, subgrad or mc");
  NetworkModel model = stage("model", [&] { return build_model(cfg); });
  InfluenceOperator op = stage("influence", [&] { return influence(model); });
  CentralityVector y = stage("centrality", [&] { return pick_centrality(cfg, op); });

  nlohmann::ordered_json doc;
  doc["budget"] = budget;
  doc["objective"] = cfg.objective;
  doc["seed"] = cfg.seed;
  auto checks = nlohmann::ordered_json::array();
  bool all_ok = true;

  for (const std::string& method : cfg.oracles) {
    nlohmann::ordered_json entry;
    entry["method"] = method;
    if (method == "grid") {
      OracleReport rep = stage("oracle", [&] {
        return brute_force_minmax(y, budget, cfg.grid_resolution);
      });
      double tol = 2.0 * y.values(0) * y.values(0) * cfg.grid_resolution;
      bool ok = rep.gap() <= tol;
      entry["oracle_value"] = rep.oracle_value;
      entry["solver_value"] = rep.solver_value;
      entry["gap"] = rep.gap();
      entry["tolerance"] = tol;
      entry["resolution"] = cfg.grid_resolution;
      entry["pass"] = ok;
      all_ok = all_ok && ok;
    } else if (method == "subgrad") {
      OracleReport rep = stage("oracle", [&] {
        return subgradient_minmax(y, budget, cfg.subgrad_iters);
      });
      double rel = rep.gap() / std::max(rep.solver_value, 1e-300);
      bool ok = rel <= 1e-4;
      entry["oracle_value"] = rep.oracle_value;
      entry["solver_value"] = rep.solver_value;
      entry["relative_gap"] = rel;
      entry["tolerance"] = 1e-4;
      entry["iterations"] = cfg.subgrad_iters;
      entry["converged"] = rep.converged;
      entry["pass"] = ok;
      all_ok = all_ok && ok;
    } else if (method == "mc") {
      ProtectionSolution sol = stage("solve", [&] { return solve(y, budget); });
      Vector sigma =
          Vector::Constant(model.n, 1.0 / std::sqrt(static_cast<double>(model.n)));
      McVariance mc = stage("oracle", [&] {
        return monte_carlo_variance(op, sol.q_star, sigma, cfg.mc_samples,
                                    cfg.seed);
      });
      AnalyticVariance exact = analytic_variance(op, sol.q_star, sigma);
      double err_total = std::abs(mc.total_variance - exact.total_variance);
      double err_mean = std::abs(mc.mean_variance - exact.mean_variance);
      bool ok = err_total <= 4.0 * mc.se_total && err_mean <= 4.0 * mc.se_mean;
      entry["empirical_total_variance"] = mc.total_variance;
      entry["analytic_total_variance"] = exact.total_variance;
      entry["se_total"] = mc.se_total;
      entry["empirical_mean_variance"] = mc.mean_variance;
      entry["analytic_mean_variance"] = exact.mean_variance;
      entry["se_mean"] = mc.se_mean;
      entry["samples"] = cfg.mc_samples;
      entry["pass"] = ok;
      all_ok = all_ok && ok;
    } else {
      throw std::invalid_argument("unknown oracle '" + method + "'");
    }
    checks.push_back(std::move(entry));
  }
  doc["checks"] = std::move(checks);
  doc["pass"] = all_ok;

  std::string path = resolve_output(cfg, "verify_report.json");
  stage("output", [&] {
    atomic_write_file(path,
                      [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
    return 0;
  });
  std::cout << (all_ok ? "verify: all oracles agree" : "verify: oracle gap detected")
            << " -> " << path << "\n";
  return all_ok ? kExitOk : kExitVerification;
}

void add_common_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--model", cfg.model, "production|coordination|quadratic|raw|star")
      ->required()
      ->check(CLI::IsMember(
          {"production", "coordination", "quadratic", "raw", "star"}));
  sub->add_option("--beta", cfg.beta, "interaction strength");
  sub->add_option("--rho-file", cfg.rho_file, "anchor weights (coordination)");
  sub->add_option("--objective", cfg.objective, "total-var|mean-var")
      ->required()
      ->check(CLI::IsMember({"total-var", "mean-var"}));
  sub->add_option("--budget", cfg.budget, "protection budget C");
  sub->add_option("--budget-grid", cfg.budget_grid, "min:max:points[:log]");
  sub->add_option("--input", cfg.input, "edge list or matrix CSV");
  sub->add_option("--output", cfg.output,
                  "output path (default: $NETSHIELD_OUTPUT_DIR)");
  sub->add_option("--seed", cfg.seed, "random seed");
  sub->add_flag("--one-based", cfg.one_based, "edge list uses 1-based indices");
  sub->add_option("--leaves", cfg.leaves, "leaf count for the star model");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal shock protection on network equilibria"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "INI config; subcommand options live in a [solve], [sweep] or "
                 "[verify] section and command-line flags win on conflict");
  RunConfig cfg;

  CLI::App* solve_cmd =
      app.add_subcommand("solve", "solve one budget and write the allocation");
  add_common_options(solve_cmd, cfg);
  solve_cmd->add_option("--format", cfg.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "solve a budget grid and write the sweep table");
  add_common_options(sweep_cmd, cfg);
  sweep_cmd->add_option("--q-output", cfg.q_output,
                        "also write per-node protection trajectories");

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "cross-check the solver against oracles");
  add_common_options(verify_cmd, cfg);
  verify_cmd
      ->add_option("--verify", cfg.oracles, "oracles to run: grid, subgrad, mc")
      ->delimiter(',')
      ->check(CLI::IsMember({"grid", "subgrad", "mc"}));
  verify_cmd->add_option("--grid-resolution", cfg.grid_resolution,
                         "grid oracle step");
  verify_cmd->add_option("--subgrad-iters", cfg.subgrad_iters,
                         "subgradient iterations");
  verify_cmd->add_option("--mc-samples", cfg.mc_samples, "Monte Carlo samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(cfg);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg);
    return cmd_verify(cfg);
  } catch (const InfeasibleBudget& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
