#ifndef NETSHIELD_WATERFILL_HPP
#define NETSHIELD_WATERFILL_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "netshield/centrality.hpp"

namespace netshield {

/// Budget below sqrt(n): even the all-ones protection does not fit.
struct InfeasibleBudget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Regime { low, intermediate, high };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::low: return "low";
    case Regime::intermediate: return "intermediate";
    case Regime::high: return "high";
  }
  return "?";
}

/// Budget thresholds separating the regimes: below c_low only the top node
/// is protected, at or above c_high every node is.
struct RegimeThresholds {
  double c_low = 0.0;
  double c_high = 0.0;
};

/// Optimal protection allocation for one budget.
struct ProtectionSolution {
  Vector q_star;                // original node order, entries >= 1
  double lambda_star = 0.0;     // optimal worst-case value
  int k_active = 0;             // nodes with q above the floor
  Regime regime = Regime::low;
  double budget = 0.0;
  RegimeThresholds thresholds;
};

/// Multipliers and recomputed residuals witnessing optimality.
struct KKTCertificate {
  double psi = 0.0;      // optimal value variable
  Vector alpha;          // objective multipliers, original order, sum 1
  double gamma = 0.0;    // budget multiplier
  Vector delta;          // floor multipliers, original order
  double max_violation = 0.0;
  bool valid = false;
  std::string worst_condition;
};

namespace detail {

/// f(lambda) = sum_i max{1, y_i^2 / lambda} over sorted values.
inline double f_sum(const Vector& sorted_values, double lam) {
  double total = 0.0;
  for (int i = 0; i < sorted_values.size(); ++i)
    total += std::max(1.0, sorted_values(i) * sorted_values(i) / lam);
  return total;
}

/// Prefix sums of squared centralities in sorted order. Shared by the solver
/// and the diffuse baseline so that identical quantities are identical bits.
inline std::vector<double> prefix_square_sums(const Vector& sorted_values) {
  std::vector<double> s(sorted_values.size() + 1, 0.0);
  for (int i = 0; i < sorted_values.size(); ++i)
    s[i + 1] = s[i] + sorted_values(i) * sorted_values(i);
  return s;
}

inline double checked_budget(const CentralityVector& y, double budget) {
  const double root_n = std::sqrt(static_cast<double>(y.n));
  if (budget < root_n - 1e-12)
    throw InfeasibleBudget("budget " + std::to_string(budget) +
                           " is below sqrt(n) = " + std::to_string(root_n));
  return std::max(budget, root_n);
}

}  // namespace detail

/// f(lambda) = sum_i max{1, (y_i / sqrt(lambda))^2}. Strictly decreasing on
/// (0, y_1^2], equals n at lambda = y_1^2, and diverges as lambda -> 0+.
inline double f_eval(const CentralityVector& y, double lam) {
  if (!(lam > 0.0)) throw std::invalid_argument("f_eval: lambda must be positive");
  return detail::f_sum(y.values, lam);
}

/// Thresholds C_low = sqrt(n + y_1^2/y_2^2 - 1) and C_high = ||y|| / y_n.
inline RegimeThresholds regime_thresholds(const CentralityVector& y) {
  const int n = y.n;
  if (n == 1) return RegimeThresholds{1.0, 1.0};
  auto s = detail::prefix_square_sums(y.values);
  double top = y.values(0), second = y.values(1), bottom = y.values(n - 1);
  RegimeThresholds t;
  t.c_low = std::sqrt(static_cast<double>(n) + (top * top) / (second * second) - 1.0);
  t.c_high = std::sqrt(s[n]) / bottom;
  return t;
}

/// Regime label for a budget. The high regime is closed at its boundary:
/// lambda(C) = ||y||^2 / C^2 already holds at C = C_high exactly.
inline Regime classify_regime(const CentralityVector& y, double budget,
                              RegimeThresholds* out_thresholds = nullptr) {
  detail::checked_budget(y, budget);
  RegimeThresholds t = regime_thresholds(y);
  if (out_thresholds) *out_thresholds = t;
  if (budget >= t.c_high) return Regime::high;
  if (budget < t.c_low) return Regime::low;
  return Regime::intermediate;
}

/// Exact waterfilling solution of
///   min_{1 <= q, ||q|| <= C}  max_{||sigma|| <= 1}  sum_i (sigma_i y_i / q_i)^2.
///
/// On (0, y_1^2] the function f is piecewise lambda -> (n - k) + S_k / lambda,
/// so lambda(C) = f^{-1}(C^2) has the closed form S_k / (C^2 - n + k) on the
/// piece where exactly k nodes clear the water level. The scan below tries
/// each k and accepts the one whose lambda lands inside its own piece; no
/// root-finding is involved. Budgets within 1e-12 below sqrt(n) are clamped.
inline ProtectionSolution solve(const CentralityVector& y, double budget) {
  const int n = y.n;
  const double c = detail::checked_budget(y, budget);
  const double c2 = c * c;
  auto s = detail::prefix_square_sums(y.values);

  double lambda = 0.0;
  int accepted_k = -1;
  if (c2 - static_cast<double>(n) <= 1e-12 * static_cast<double>(n)) {
    // C = sqrt(n): the only feasible point is the all-ones vector and
    // f(y_1^2) = n = C^2. The general formula is 0/0 here.
    lambda = y.values(0) * y.values(0);
    accepted_k = 0;
  } else {
    constexpr double slack = 1e-14;  // absorbs rounding at piece boundaries
    for (int k = 1; k <= n; ++k) {
      double denom = c2 - static_cast<double>(n - k);
      if (denom <= 0.0) continue;
      double cand = s[k] / denom;
      double upper = y.values(k - 1) * y.values(k - 1);
      double lower = k < n ? y.values(k) * y.values(k) : 0.0;
      if (upper > cand * (1.0 - slack) && cand >= lower * (1.0 - slack)) {
        lambda = cand;
        accepted_k = k;
        break;
      }
    }
    if (accepted_k < 0)
      throw std::logic_error("solve: no waterfilling piece accepted");
  }

  const double sqrt_lambda = std::sqrt(lambda);
  Vector q_sorted = Vector::Ones(n);
  for (int i = 0; i < accepted_k; ++i)
    q_sorted(i) = std::max(1.0, y.values(i) / sqrt_lambda);

  ProtectionSolution sol;
  sol.q_star = Vector(n);
  for (int r = 0; r < n; ++r) sol.q_star(y.perm[r]) = q_sorted(r);
  sol.lambda_star = lambda;
  sol.k_active = accepted_k;
  sol.budget = budget;
  sol.regime = classify_regime(y, budget, &sol.thresholds);
  return sol;
}

/// max_i (y_i / q_i)^2, the worst-case value attained by a unit shock.
inline double objective_value(const CentralityVector& y, const Vector& q) {
  if (q.size() != y.n)
    throw std::invalid_argument("objective_value: dimension mismatch");
  Vector orig = y.to_original();
  double worst = 0.0;
  for (int i = 0; i < y.n; ++i) {
    double r = orig(i) / q(i);
    worst = std::max(worst, r * r);
  }
  return worst;
}

/// A unit-norm shock concentrated on the argmax of y_i / q_i, splitting its
/// power uniformly over ties (relative tolerance 1e-9). Attains the value
/// returned by objective_value.
inline Vector worst_case_shock(const CentralityVector& y, const Vector& q) {
  if (q.size() != y.n)
    throw std::invalid_argument("worst_case_shock: dimension mismatch");
  Vector orig = y.to_original();
  Vector ratio(y.n);
  for (int i = 0; i < y.n; ++i) ratio(i) = orig(i) / q(i);
  double top = ratio.maxCoeff();
  std::vector<int> ties;
  for (int i = 0; i < y.n; ++i)
    if (ratio(i) >= top * (1.0 - 1e-9)) ties.push_back(i);
  Vector sigma = Vector::Zero(y.n);
  double mass = 1.0 / std::sqrt(static_cast<double>(ties.size()));
  for (int i : ties) sigma(i) = mass;
  return sigma;
}

/// Verifies a solution against the stationarity, feasibility and
/// complementary-slackness conditions of the convex reformulation
///   min psi  s.t. (y_i/q_i)^2 <= psi, q_i >= 1, ||q|| <= C.
/// Multipliers are reconstructed from scratch; every residual below is
/// recomputed from (y, q, lambda) alone. Violations are normalized by the
/// natural scale of their condition.
inline KKTCertificate kkt_verify(const CentralityVector& y,
                                 const ProtectionSolution& sol, double tol) {
  const int n = y.n;
  if (sol.q_star.size() != n)
    throw std::invalid_argument("kkt_verify: dimension mismatch");
  const double psi = sol.lambda_star;
  const double c = std::max(sol.budget, std::sqrt(static_cast<double>(n)));
  const double sqrt_psi = std::sqrt(psi);
  Vector orig = y.to_original();
  const Vector& q = sol.q_star;

  // Reconstruct multipliers in sorted space: active nodes carry
  // alpha_i = y_i^2 / S_k with gamma = psi^2 / S_k; when no node is active,
  // the argmax nodes share the unit mass and gamma = psi / |argmax|.
  auto s = detail::prefix_square_sums(y.values);
  Vector alpha_sorted = Vector::Zero(n);
  Vector delta_sorted = Vector::Zero(n);
  double gamma = 0.0;
  int k = sol.k_active;
  if (k > 0) {
    gamma = psi * psi / s[k];
    for (int i = 0; i < k; ++i)
      alpha_sorted(i) = y.values(i) * y.values(i) / s[k];
    for (int i = k; i < n; ++i) delta_sorted(i) = 2.0 * gamma;
  } else {
    std::vector<int> argmax;
    double top = y.values(0);
    for (int i = 0; i < n; ++i)
      if (y.values(i) >= top * (1.0 - 1e-12)) argmax.push_back(i);
    gamma = psi / static_cast<double>(argmax.size());
    for (int i : argmax) alpha_sorted(i) = 1.0 / static_cast<double>(argmax.size());
    for (int i = 0; i < n; ++i)
      delta_sorted(i) = 2.0 * gamma - 2.0 * alpha_sorted(i) * y.values(i) * y.values(i);
  }

  KKTCertificate cert;
  cert.psi = psi;
  cert.gamma = gamma;
  cert.alpha = Vector(n);
  cert.delta = Vector(n);
  for (int r = 0; r < n; ++r) {
    cert.alpha(y.perm[r]) = alpha_sorted(r);
    cert.delta(y.perm[r]) = delta_sorted(r);
  }

  double worst = -1.0;
  auto record = [&](double violation, const char* label) {
    if (violation > worst) {
      worst = violation;
      cert.worst_condition = label;
    }
  };

  record(std::max(0.0, 1.0 - q.minCoeff()), "primal floor q >= 1");
  record(std::abs(q.norm() - c) / std::max(1.0, c), "budget tightness ||q|| = C");
  double ratio_excess = 0.0, closed_form = 0.0;
  for (int i = 0; i < n; ++i) {
    double r2 = (orig(i) / q(i)) * (orig(i) / q(i));
    ratio_excess = std::max(ratio_excess, (r2 - psi) / psi);
    closed_form =
        std::max(closed_form, std::abs(q(i) - std::max(1.0, orig(i) / sqrt_psi)));
  }
  record(ratio_excess, "value bound (y_i/q_i)^2 <= psi");
  record(closed_form, "closed form q_i = max{1, y_i/sqrt(psi)}");
  record(std::abs(detail::f_sum(y.values, psi) - c * c) / (c * c),
         "water level f(psi) = C^2");

  record(std::max(0.0, -cert.alpha.minCoeff()), "dual alpha >= 0");
  record(std::max(0.0, -cert.delta.minCoeff()), "dual delta >= 0");
  record(std::max(0.0, -gamma), "dual gamma >= 0");
  record(std::abs(cert.alpha.sum() - 1.0), "multiplier mass sum(alpha) = 1");

  double stationarity = 0.0, comp_alpha = 0.0, comp_delta = 0.0;
  for (int i = 0; i < n; ++i) {
    double a = cert.alpha(i), dlt = cert.delta(i), qi = q(i), yi = orig(i);
    double t1 = -2.0 * a * yi * yi / (qi * qi * qi);
    double t2 = 2.0 * gamma * qi;
    double scale = 1.0 + std::abs(t1) + std::abs(t2) + std::abs(dlt);
    stationarity = std::max(stationarity, std::abs(t1 + t2 - dlt) / scale);
    double r2 = (yi / qi) * (yi / qi);
    comp_alpha = std::max(comp_alpha, std::abs(a * (r2 - psi)) / std::max(1.0, psi));
    comp_delta = std::max(comp_delta, std::abs(dlt * (qi - 1.0)) / (1.0 + dlt));
  }
  record(stationarity, "stationarity in q");
  record(comp_alpha, "complementary slackness alpha");
  record(comp_delta, "complementary slackness delta");

  cert.max_violation = worst;
  cert.valid = worst <= tol;
  return cert;
}

/// Protection proportional to centrality with the whole budget spent:
/// q_i = C y_i / ||y||. The floor q >= 1 is deliberately not enforced, so
/// the baseline stays distinct from the waterfilling optimum below C_high;
/// `feasible` reports whether all entries clear the floor.
struct DiffuseBaseline {
  Vector q_diff;        // original node order
  double value = 0.0;   // max_i (y_i / q_i)^2 = ||y||^2 / C^2
  bool feasible = false;
};

inline DiffuseBaseline diffuse_baseline(const CentralityVector& y, double budget) {
  const double c = detail::checked_budget(y, budget);
  auto s = detail::prefix_square_sums(y.values);
  const double norm_y = std::sqrt(s[y.n]);
  DiffuseBaseline out;
  out.q_diff = Vector(y.n);
  bool feasible = true;
  for (int r = 0; r < y.n; ++r) {
    double qi = c * y.values(r) / norm_y;
    out.q_diff(y.perm[r]) = qi;
    if (qi < 1.0) feasible = false;
  }
  // All ratios y_i / q_i coincide at ||y|| / C, so the max is the common value.
  out.value = s[y.n] / (c * c);
  out.feasible = feasible;
  return out;
}

/// One row of a budget sweep.
struct SweepRow {
  double budget = 0.0;
  double lambda_opt = 0.0;
  double lambda_diff = 0.0;
  double ratio = 0.0;  // lambda_opt / lambda_diff
  int k_active = 0;
  Regime regime = Regime::low;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  Matrix q_per_budget;  // rows follow the grid, columns are original nodes
};

/// Budget grid helper; log spacing echoes the usual sqrt(n)..n plotting window.
inline std::vector<double> make_budget_grid(double lo, double hi, int points,
                                            bool log_spacing) {
  if (points < 1) throw std::invalid_argument("make_budget_grid: points < 1");
  if (points == 1) return {lo};
  if (!(hi > lo))
    throw std::invalid_argument("make_budget_grid: need hi > lo for a grid");
  if (log_spacing && !(lo > 0.0))
    throw std::invalid_argument("make_budget_grid: log spacing needs lo > 0");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(points - 1);
    grid[i] = log_spacing ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
  }
  return grid;
}

/// Solves every budget on a strictly increasing grid. The whole grid is
/// validated before any budget is solved. Budgets are independent, so they
/// are evaluated concurrently; each worker writes its own preassigned rows,
/// which keeps the output in grid order and identical to a sequential run.
inline SweepResult budget_sweep(const CentralityVector& y,
                                const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("budget_sweep: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw std::invalid_argument("budget_sweep: grid must be strictly increasing");
    detail::checked_budget(y, grid[i]);
  }
  SweepResult result;
  result.rows.resize(grid.size());
  result.q_per_budget = Matrix(static_cast<int>(grid.size()), y.n);

  auto solve_slot = [&](std::size_t i) {
    ProtectionSolution sol = solve(y, grid[i]);
    DiffuseBaseline base = diffuse_baseline(y, grid[i]);
    SweepRow row;
    row.budget = grid[i];
    row.lambda_opt = sol.lambda_star;
    row.lambda_diff = base.value;
    row.ratio = sol.lambda_star / base.value;
    row.k_active = sol.k_active;
    row.regime = sol.regime;
    result.rows[i] = row;
    result.q_per_budget.row(static_cast<int>(i)) = sol.q_star.transpose();
  };

  const std::size_t hw = std::thread::hardware_concurrency();
  const std::size_t workers = std::min<std::size_t>(hw ? hw : 1, grid.size());
  if (workers <= 1 || grid.size() < 16) {
    for (std::size_t i = 0; i < grid.size(); ++i) solve_slot(i);
    return result;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < grid.size(); i += workers) solve_slot(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return result;
}

}  // namespace netshield

#endif  // NETSHIELD_WATERFILL_HPP
