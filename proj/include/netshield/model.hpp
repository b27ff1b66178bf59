#ifndef NETSHIELD_MODEL_HPP
#define NETSHIELD_MODEL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netshield {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Provenance { production, coordination, quadratic, raw };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::production: return "production";
    case Provenance::coordination: return "coordination";
    case Provenance::quadratic: return "quadratic";
    case Provenance::raw: return "raw";
  }
  return "?";
}

/// Power-iteration estimate of the spectral radius of a nonnegative matrix.
/// Runs 10*n normalized iterations (sup-norm), which is plenty for the
/// sub-stochastic matrices handled here.
inline double spectral_radius_estimate(const Matrix& a, double tol = 1e-9) {
  const auto n = a.rows();
  if (n == 0) return 0.0;
  Vector x = Vector::Ones(n);
  double radius = 0.0;
  const int iters = 10 * static_cast<int>(n);
  for (int k = 0; k < iters; ++k) {
    Vector next = a * x;
    double norm = next.cwiseAbs().maxCoeff();
    if (norm == 0.0) return 0.0;  // nilpotent
    next /= norm;
    if (std::abs(norm - radius) < tol && k > 2) return norm;
    radius = norm;
    x = std::move(next);
  }
  return radius;
}

/// Interaction matrix Lambda plus the diagonal anchoring weights d of the
/// equilibrium map x = (I - Lambda)^{-1} D c. Immutable after construction.
struct NetworkModel {
  Matrix lambda;
  Vector d;
  int n = 0;
  Provenance provenance = Provenance::raw;
};

namespace detail {

inline void validate_model(const NetworkModel& m) {
  if (m.lambda.rows() != m.lambda.cols())
    throw std::invalid_argument("NetworkModel: lambda must be square");
  if (m.d.size() != m.lambda.rows())
    throw std::invalid_argument("NetworkModel: d dimension mismatch");
  const int n = static_cast<int>(m.lambda.rows());
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (m.lambda(i, j) < 0.0)
        throw std::invalid_argument("NetworkModel: negative entry in lambda at row " +
                                    std::to_string(i));
      row_sum += m.lambda(i, j);
    }
    if (row_sum > 1.0 + 1e-12)
      throw std::invalid_argument("NetworkModel: row " + std::to_string(i) +
                                  " of lambda sums to " + std::to_string(row_sum) +
                                  " > 1");
    if (m.d(i) < -1e-15 || m.d(i) > 1.0 + 1e-12)
      throw std::invalid_argument("NetworkModel: d[" + std::to_string(i) +
                                  "] outside [0,1]");
  }
  double radius = spectral_radius_estimate(m.lambda);
  if (radius >= 1.0 - 1e-9)
    throw std::invalid_argument(
        "NetworkModel: spectral radius estimate " + std::to_string(radius) +
        " is not strictly below 1");
}

/// True when every node has a directed path (along positive entries of w,
/// i -> j for w(i,j) > 0) into the anchored set. Breadth-first search from
/// the anchors over reversed edges.
inline bool globally_reachable(const Matrix& w, const std::vector<int>& anchors) {
  const int n = static_cast<int>(w.rows());
  std::vector<char> seen(n, 0);
  std::queue<int> frontier;
  for (int a : anchors) {
    seen[a] = 1;
    frontier.push(a);
  }
  while (!frontier.empty()) {
    int j = frontier.front();
    frontier.pop();
    for (int i = 0; i < n; ++i) {
      if (!seen[i] && w(i, j) > 0.0) {
        seen[i] = 1;
        frontier.push(i);
      }
    }
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) return false;
  return true;
}

}  // namespace detail

/// Production-network model: Lambda = beta * P with P row-stochastic and
/// D = (1 - beta) I, so L is the row-stochastic Leontief operator.
inline NetworkModel build_production(double beta, const Matrix& p) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("build_production: beta must lie in (0,1), got " +
                                std::to_string(beta));
  if (p.rows() != p.cols())
    throw std::invalid_argument("build_production: p must be square");
  const int n = static_cast<int>(p.rows());
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (p(i, j) < 0.0)
        throw std::invalid_argument("build_production: negative entry in row " +
                                    std::to_string(i));
      row_sum += p(i, j);
    }
    if (std::abs(row_sum - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "build_production: row " << i << " of p sums to " << row_sum
          << ", expected 1";
      throw std::invalid_argument(msg.str());
    }
  }
  NetworkModel m{beta * p, Vector::Constant(n, 1.0 - beta), n,
                 Provenance::production};
  detail::validate_model(m);
  return m;
}

/// Coordination-game model: Lambda_ij = W_ij / (w_i + rho_i),
/// D_ii = rho_i / (w_i + rho_i), where w_i is the out-weight of node i.
/// Requires the anchored set {i : rho_i > 0} to be globally reachable,
/// otherwise the interaction matrix has spectral radius 1.
inline NetworkModel build_coordination(const Matrix& w, const Vector& rho) {
  if (w.rows() != w.cols())
    throw std::invalid_argument("build_coordination: w must be square");
  const int n = static_cast<int>(w.rows());
  if (rho.size() != n)
    throw std::invalid_argument("build_coordination: rho dimension mismatch");
  std::vector<int> anchors;
  for (int i = 0; i < n; ++i) {
    if (rho(i) < 0.0)
      throw std::invalid_argument("build_coordination: rho[" + std::to_string(i) +
                                  "] is negative");
    if (rho(i) > 0.0) anchors.push_back(i);
  }
  Vector out_weight = w.rowwise().sum();
  for (int i = 0; i < n; ++i) {
    if (w.row(i).minCoeff() < 0.0)
      throw std::invalid_argument("build_coordination: negative entry in row " +
                                  std::to_string(i));
    if (out_weight(i) <= 0.0)
      throw std::invalid_argument("build_coordination: node " + std::to_string(i) +
                                  " has zero total interaction weight");
  }
  if (anchors.empty() || !detail::globally_reachable(w, anchors))
    throw std::invalid_argument(
        "build_coordination: anchored set {i: rho_i > 0} is not globally "
        "reachable; equilibrium is not unique");
  NetworkModel m;
  m.lambda = Matrix(n, n);
  m.d = Vector(n);
  for (int i = 0; i < n; ++i) {
    double denom = out_weight(i) + rho(i);
    for (int j = 0; j < n; ++j) m.lambda(i, j) = w(i, j) / denom;
    m.d(i) = rho(i) / denom;
  }
  m.n = n;
  m.provenance = Provenance::coordination;
  detail::validate_model(m);
  return m;
}

/// Quadratic-game model: Lambda = beta * W, D = I. Requires beta * w_i < 1
/// for every row weight w_i.
inline NetworkModel build_quadratic(double beta, const Matrix& w) {
  if (w.rows() != w.cols())
    throw std::invalid_argument("build_quadratic: w must be square");
  if (beta < 0.0)
    throw std::invalid_argument("build_quadratic: beta must be nonnegative");
  const int n = static_cast<int>(w.rows());
  for (int i = 0; i < n; ++i) {
    if (w.row(i).minCoeff() < 0.0)
      throw std::invalid_argument("build_quadratic: negative entry in row " +
                                  std::to_string(i));
    double scaled = beta * w.row(i).sum();
    if (scaled >= 1.0) {
      std::ostringstream msg;
      msg << "build_quadratic: beta * w_" << i << " = " << scaled
          << " must be below 1";
      throw std::invalid_argument(msg.str());
    }
  }
  NetworkModel m{beta * w, Vector::Ones(n), n, Provenance::quadratic};
  detail::validate_model(m);
  return m;
}

/// Wrap an explicit (Lambda, d) pair, running the full invariant checks.
inline NetworkModel build_raw(const Matrix& lambda, const Vector& d) {
  NetworkModel m{lambda, d, static_cast<int>(lambda.rows()), Provenance::raw};
  detail::validate_model(m);
  return m;
}

inline NetworkModel build_raw(const Matrix& lambda) {
  return build_raw(lambda, Vector::Ones(lambda.rows()));
}

/// The influence operator L = (I - Lambda)^{-1} D and its dimension.
struct InfluenceOperator {
  Matrix l;
  int n = 0;
};

/// Computes L by one LU factorization of (I - Lambda) and a solve against the
/// diagonal right-hand side; columns with d_i = 0 stay exactly zero. The
/// residual (I - Lambda) L - D is checked rather than trusting the solve.
inline InfluenceOperator influence(const NetworkModel& model) {
  const int n = model.n;
  Matrix system = Matrix::Identity(n, n) - model.lambda;
  Eigen::PartialPivLU<Matrix> lu(system);
  Matrix rhs = Matrix::Zero(n, n);
  rhs.diagonal() = model.d;
  Matrix l = lu.solve(rhs);
  double residual = (system * l - rhs).cwiseAbs().maxCoeff();
  if (!std::isfinite(residual) || residual > 1e-10)
    throw std::runtime_error(
        "influence: solve residual " + std::to_string(residual) +
        " exceeds 1e-10; (I - Lambda) is singular or nearly so");
  return InfluenceOperator{std::move(l), n};
}

/// Reference inputs, shock scales and protections entering c = c_bar + Q^{-1} eta.
struct EquilibriumInput {
  Vector c_bar;
  Vector shock_sigma;
  Vector protection_q;

  /// True when sigma encodes a unit-total-power shock budget.
  bool unit_power(double tol = 1e-9) const {
    return std::abs(shock_sigma.squaredNorm() - 1.0) <= tol;
  }
};

inline void validate_input(const EquilibriumInput& in, int n) {
  if (in.c_bar.size() != n || in.shock_sigma.size() != n ||
      in.protection_q.size() != n)
    throw std::invalid_argument("EquilibriumInput: dimension mismatch");
  for (int i = 0; i < n; ++i) {
    if (in.shock_sigma(i) < 0.0)
      throw std::invalid_argument("EquilibriumInput: sigma[" + std::to_string(i) +
                                  "] is negative");
    if (in.protection_q(i) < 1.0)
      throw std::invalid_argument("EquilibriumInput: protection q[" +
                                  std::to_string(i) + "] is below 1");
  }
}

/// Equilibrium x = L (c_bar + Q^{-1} eta) for a realized shock eta.
inline Vector equilibrium(const InfluenceOperator& op, const EquilibriumInput& input,
                          const Vector& eta) {
  validate_input(input, op.n);
  if (eta.size() != op.n)
    throw std::invalid_argument("equilibrium: eta dimension mismatch");
  Vector c = input.c_bar + eta.cwiseQuotient(input.protection_q);
  return op.l * c;
}

struct DynamicsResult {
  Vector x;
  int steps = 0;
};

/// Fixed-point iteration x(k+1) = Lambda x(k) + D c. Converges to the same
/// point as the direct solve whenever the model invariants hold.
inline DynamicsResult iterate_dynamics(const NetworkModel& model, const Vector& c,
                                       const Vector& x0, double tol,
                                       int max_steps) {
  if (c.size() != model.n || x0.size() != model.n)
    throw std::invalid_argument("iterate_dynamics: dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("iterate_dynamics: tol must be > 0");
  Vector forcing = model.d.cwiseProduct(c);
  Vector x = x0;
  for (int k = 1; k <= max_steps; ++k) {
    Vector next = model.lambda * x + forcing;
    double diff = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    if (diff < tol) return DynamicsResult{std::move(x), k};
  }
  double residual = (model.lambda * x + forcing - x).cwiseAbs().maxCoeff();
  throw std::runtime_error("iterate_dynamics: no convergence in " +
                           std::to_string(max_steps) + " steps; last residual " +
                           std::to_string(residual));
}

}  // namespace netshield

#endif  // NETSHIELD_MODEL_HPP
