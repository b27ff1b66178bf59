#ifndef NETSHIELD_ORACLE_HPP
#define NETSHIELD_ORACLE_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "netshield/model.hpp"
#include "netshield/rng.hpp"
#include "netshield/waterfill.hpp"

namespace netshield {

enum class OracleMethod { grid, subgradient, montecarlo };

inline const char* to_string(OracleMethod m) {
  switch (m) {
    case OracleMethod::grid: return "grid";
    case OracleMethod::subgradient: return "subgradient";
    case OracleMethod::montecarlo: return "montecarlo";
  }
  return "?";
}

struct OracleReport {
  double oracle_value = 0.0;
  double solver_value = 0.0;
  OracleMethod method = OracleMethod::grid;
  double samples_or_resolution = 0.0;
  bool converged = true;

  double gap() const { return std::abs(oracle_value - solver_value); }
};

namespace detail {

/// Exact minimum of max_i (y_i/q_i)^2 over the finite grid
/// {q : q_i in {1, 1+res, ...}, ||q|| <= C}. Coordinates before the last run
/// over the whole grid (with budget pruning); the last coordinate is monotone
/// in the objective, so only its largest feasible grid value can be optimal.
inline void grid_scan(const Vector& y, int depth, double used, double prefix_max,
                      double c2, double res, double& best) {
  const int n = static_cast<int>(y.size());
  if (prefix_max >= best) return;
  double remaining_floor = static_cast<double>(n - 1 - depth);
  if (depth == n - 1) {
    double rem = c2 - used;
    long j = static_cast<long>(std::floor((std::sqrt(rem) - 1.0) / res));
    double q = 1.0 + static_cast<double>(j) * res;
    while (j > 0 && used + q * q > c2 * (1.0 + 1e-15))
      q = 1.0 + static_cast<double>(--j) * res;
    double r = y(depth) / q;
    best = std::min(best, std::max(prefix_max, r * r));
    return;
  }
  for (long j = 0;; ++j) {
    double q = 1.0 + static_cast<double>(j) * res;
    double used_next = used + q * q;
    if (used_next + remaining_floor > c2) break;
    double r = y(depth) / q;
    grid_scan(y, depth + 1, used_next, std::max(prefix_max, r * r), c2, res, best);
  }
}

/// Clip to the q >= 1 box, radially rescale onto the ||q|| <= C ball when
/// violated, and alternate to a fixed point. A final exact repair walks along
/// the segment toward the all-ones point (which always fits the budget), so
/// the returned point is feasible and never undershoots the true optimum.
inline Vector project_box_ball(Vector q, double c) {
  const int n = static_cast<int>(q.size());
  for (int pass = 0; pass < 8 * (n + 1); ++pass) {
    q = q.cwiseMax(1.0);
    double norm = q.norm();
    if (norm <= c * (1.0 + 1e-15)) return q;
    q *= c / norm;
  }
  q = q.cwiseMax(1.0);
  double excess = q.squaredNorm() - c * c;
  if (excess > 0.0) {
    Vector dir = q - Vector::Ones(n);
    double a = dir.squaredNorm();
    double b = 2.0 * dir.sum();
    double k = static_cast<double>(n) - c * c;
    double t = a > 0.0 ? (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * k))) /
                             (2.0 * a)
                       : 0.0;
    q = Vector::Ones(n) + t * dir;
  }
  return q;
}

}  // namespace detail

/// Grid brute force for small instances (n <= 4). The inner maximization is
/// closed-form, so only q is enumerated. The grid minimum can exceed the true
/// optimum by at most the local Lipschitz bound 2 y_1^2 * resolution.
inline OracleReport brute_force_minmax(const CentralityVector& y, double budget,
                                       double resolution) {
  if (y.n > 4)
    throw std::invalid_argument("brute_force_minmax: n = " + std::to_string(y.n) +
                                " is too large for the combinatorial grid");
  if (!(resolution > 0.0))
    throw std::invalid_argument("brute_force_minmax: resolution must be positive");
  const double root_n = std::sqrt(static_cast<double>(y.n));
  if (budget < root_n - 1e-12)
    throw InfeasibleBudget("brute_force_minmax: empty grid, budget below sqrt(n)");
  const double c = std::max(budget, root_n);

  double best = std::numeric_limits<double>::infinity();
  detail::grid_scan(y.values, 0, 0.0, 0.0, c * c, resolution, best);

  OracleReport report;
  report.oracle_value = best;
  report.solver_value = solve(y, budget).lambda_star;
  report.method = OracleMethod::grid;
  report.samples_or_resolution = resolution;
  return report;
}

/// Projected subgradient descent on q -> max_i (y_i/q_i)^2 with Polyak-style
/// steps against an adaptive target: the level delta below the incumbent is
/// halved whenever 50 iterations pass without improvement. Subgradients are
/// averaged over the near-argmax ratios, which kills the zig-zag between
/// tied nodes near the optimum.
inline OracleReport subgradient_minmax(const CentralityVector& y, double budget,
                                       int iters) {
  const int n = y.n;
  const double root_n = std::sqrt(static_cast<double>(n));
  if (budget < root_n - 1e-12)
    throw InfeasibleBudget("subgradient_minmax: budget below sqrt(n)");
  const double c = std::max(budget, root_n);

  auto value = [&](const Vector& q) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      double r = y.values(i) / q(i);
      worst = std::max(worst, r * r);
    }
    return worst;
  };

  Vector q = detail::project_box_ball(Vector::Constant(n, c / root_n), c);
  double best = value(q);
  double delta = 0.1 * best + 1e-12;
  const double delta_floor = 1e-14 * (best + 1.0);
  int stalled = 0;
  bool converged = false;

  for (int k = 0; k < iters; ++k) {
    Vector ratio2(n);
    double f = 0.0;
    for (int i = 0; i < n; ++i) {
      double r = y.values(i) / q(i);
      ratio2(i) = r * r;
      f = std::max(f, ratio2(i));
    }
    if (f < best * (1.0 - 1e-15)) {
      best = f;
      stalled = 0;
    } else if (++stalled > 50) {
      delta *= 0.5;
      stalled = 0;
      if (delta < delta_floor) {
        converged = true;
        break;
      }
    }
    Vector g = Vector::Zero(n);
    int active = 0;
    for (int i = 0; i < n; ++i)
      if (ratio2(i) >= f * (1.0 - 1e-9)) ++active;
    for (int i = 0; i < n; ++i)
      if (ratio2(i) >= f * (1.0 - 1e-9))
        g(i) = -2.0 * y.values(i) * y.values(i) /
               (q(i) * q(i) * q(i) * static_cast<double>(active));
    double g2 = g.squaredNorm();
    if (g2 <= 0.0) break;
    double step = (f - (best - delta)) / g2;
    q = detail::project_box_ball(q - step * g, c);
  }

  OracleReport report;
  report.oracle_value = best;
  report.solver_value = solve(y, budget).lambda_star;
  report.method = OracleMethod::subgradient;
  report.samples_or_resolution = static_cast<double>(iters);
  report.converged = converged || iters == 0;
  return report;
}

/// Empirical total and mean variance of x = L Q^{-1} eta under independent
/// zero-mean Gaussian shocks with standard deviations sigma, plus standard
/// errors of both estimators. Sample s draws from substream(seed, s), so the
/// result is reproducible bit-for-bit and independent of any worker split.
struct McVariance {
  double total_variance = 0.0;
  double mean_variance = 0.0;
  double se_total = 0.0;
  double se_mean = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
};

inline McVariance monte_carlo_variance(const InfluenceOperator& op, const Vector& q,
                                       const Vector& sigma, int samples,
                                       std::uint64_t seed) {
  const int n = op.n;
  if (q.size() != n || sigma.size() != n)
    throw std::invalid_argument("monte_carlo_variance: dimension mismatch");
  if (std::abs(sigma.squaredNorm() - 1.0) > 1e-9)
    throw std::invalid_argument(
        "monte_carlo_variance: sigma must carry unit total power");
  if (q.minCoeff() < 1.0)
    throw std::invalid_argument("monte_carlo_variance: protections must be >= 1");
  if (samples < 1000)
    throw std::invalid_argument("monte_carlo_variance: need at least 1000 samples");

  Vector scale = sigma.cwiseQuotient(q);
  Vector sum_x = Vector::Zero(n);
  double z1 = 0.0, z2 = 0.0;             // power sums of ||x||^2
  double p1 = 0.0, p2 = 0.0, p3 = 0.0, p4 = 0.0;  // power sums of mean(x)
  Vector shock(n), x(n);

  for (int s = 0; s < samples; ++s) {
    NormalSampler gen = substream(seed, static_cast<std::uint64_t>(s));
    for (int i = 0; i < n; ++i) shock(i) = scale(i) * gen.next();
    x.noalias() = op.l * shock;
    sum_x += x;
    double z = x.squaredNorm();
    z1 += z;
    z2 += z * z;
    double m = x.mean();
    double m2 = m * m;
    p1 += m;
    p2 += m2;
    p3 += m2 * m;
    p4 += m2 * m2;
  }

  const double ns = static_cast<double>(samples);
  McVariance out;
  out.samples = samples;
  out.seed = seed;
  out.total_variance = (z1 - sum_x.squaredNorm() / ns) / (ns - 1.0);
  double mbar = p1 / ns;
  out.mean_variance = (p2 - ns * mbar * mbar) / (ns - 1.0);

  double var_z = z2 / ns - (z1 / ns) * (z1 / ns);
  out.se_total = std::sqrt(std::max(0.0, var_z) / ns);
  double mu2 = p2 / ns - mbar * mbar;
  double mu4 =
      p4 / ns - 4.0 * mbar * (p3 / ns) + 6.0 * mbar * mbar * (p2 / ns) -
      3.0 * mbar * mbar * mbar * mbar;
  out.se_mean = std::sqrt(std::max(0.0, mu4 - mu2 * mu2) / ns);
  return out;
}

/// Analytic counterparts of the two Monte Carlo estimates:
/// sum_i Var[x_i] = sum_i (sigma_i ell_i / q_i)^2 and
/// Var[mean(x)] = sum_i (sigma_i v_i / q_i)^2.
struct AnalyticVariance {
  double total_variance = 0.0;
  double mean_variance = 0.0;
};

inline AnalyticVariance analytic_variance(const InfluenceOperator& op,
                                          const Vector& q, const Vector& sigma) {
  const int n = op.n;
  AnalyticVariance out;
  for (int i = 0; i < n; ++i) {
    double ell = op.l.col(i).norm();
    double v = op.l.col(i).sum() / static_cast<double>(n);
    double t = sigma(i) * ell / q(i);
    double m = sigma(i) * v / q(i);
    out.total_variance += t * t;
    out.mean_variance += m * m;
  }
  return out;
}

}  // namespace netshield

#endif  // NETSHIELD_ORACLE_HPP
