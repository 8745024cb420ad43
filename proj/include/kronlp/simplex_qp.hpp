#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <vector>

#include "kronlp/types.hpp"

// Minimize w^T G w - w^T h over the probability simplex. G carries the
// ridge on its diagonal, so the problem is strictly convex whenever the
// ridge weight is positive. Solved by projected gradient with backtracking;
// once the active set settles, the equality-constrained KKT system on the
// support is solved directly so the stationarity residual reaches the
// requested tolerance instead of stalling at the first-order rate.

namespace kronlp {

struct SimplexQp {
  Matrix G;
  Vector h;
};

// Carries the best iterate found before the iteration budget ran out.
struct QpMaxIterError : NumericError {
  QpMaxIterError(const std::string& what, Vector iterate)
      : NumericError(what), best_iterate(std::move(iterate)) {}
  Vector best_iterate;
};

// Euclidean projection onto {w : w >= 0, sum w = 1}.
inline Vector project_to_simplex(const Vector& v) {
  const Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumsum += u[static_cast<std::size_t>(k)];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[static_cast<std::size_t>(k)] > t) tau = t;
  }
  return (v.array() - tau).max(0.0).matrix();
}

namespace detail {

inline double qp_objective(const SimplexQp& qp, const Vector& w) {
  return w.dot(qp.G * w) - w.dot(qp.h);
}

// max over the simplex KKT conditions: positive coordinates share the
// multiplier, zero coordinates sit at or above it.
inline double qp_kkt_residual(const SimplexQp& qp, const Vector& w) {
  const Vector g = 2.0 * (qp.G * w) - qp.h;
  double support_sum = 0.0;
  Index support_count = 0;
  for (Index v = 0; v < w.size(); ++v) {
    if (w[v] > 0.0) {
      support_sum += g[v];
      ++support_count;
    }
  }
  if (support_count == 0) return std::numeric_limits<double>::infinity();
  const double nu = support_sum / static_cast<double>(support_count);
  double resid = 0.0;
  for (Index v = 0; v < w.size(); ++v) {
    if (w[v] > 0.0)
      resid = std::max(resid, std::abs(g[v] - nu));
    else
      resid = std::max(resid, std::max(0.0, nu - g[v]));
  }
  return resid;
}

// Solve the equality-constrained KKT system on the current support and
// accept the result only if it is feasible and no worse than the iterate.
inline bool qp_polish(const SimplexQp& qp, Vector& w, double tol) {
  std::vector<Index> support;
  for (Index v = 0; v < w.size(); ++v)
    if (w[v] > 1e-12) support.push_back(v);
  const Index s = static_cast<Index>(support.size());
  if (s == 0) return false;
  Matrix kkt = Matrix::Zero(s + 1, s + 1);
  Vector rhs(s + 1);
  for (Index a = 0; a < s; ++a) {
    for (Index b = 0; b < s; ++b) kkt(a, b) = 2.0 * qp.G(support[a], support[b]);
    kkt(a, s) = -1.0;
    kkt(s, a) = 1.0;
    rhs[a] = qp.h[support[a]];
  }
  rhs[s] = 1.0;
  Eigen::FullPivLU<Matrix> lu(kkt);
  if (!lu.isInvertible()) return false;
  const Vector sol = lu.solve(rhs);
  Vector candidate = Vector::Zero(w.size());
  for (Index a = 0; a < s; ++a) {
    if (sol[a] < -1e-13) return false;
    candidate[support[a]] = std::max(0.0, sol[a]);
  }
  candidate /= candidate.sum();
  if (qp_objective(qp, candidate) > qp_objective(qp, w) + 1e-14 * (1.0 + std::abs(qp_objective(qp, w))))
    return false;
  if (qp_kkt_residual(qp, candidate) > tol) return false;
  w = candidate;
  return true;
}

}  // namespace detail

inline Vector solve_simplex_qp(const SimplexQp& qp, const Vector& w0, double tol = 1e-10,
                               int max_iter = 10000) {
  const Index n = qp.G.rows();
  if (qp.G.cols() != n || qp.h.size() != n || w0.size() != n)
    throw std::invalid_argument("solve_simplex_qp: dimension mismatch");
  const double scale = std::max(1.0, qp.G.cwiseAbs().maxCoeff());
  if ((qp.G - qp.G.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("solve_simplex_qp: G is not symmetric");
  if (n == 1) return Vector::Ones(1);

  SimplexQp problem = qp;
  Eigen::SelfAdjointEigenSolver<Matrix> spectrum(problem.G, Eigen::EigenvaluesOnly);
  const double min_eig = spectrum.eigenvalues().minCoeff();
  const double max_eig = spectrum.eigenvalues().maxCoeff();
  if (min_eig <= 1e-12) {
    std::cerr << "solve_simplex_qp: G is not strictly convex (min eigenvalue " << min_eig
              << "), adding 1e-12 ridge\n";
    problem.G.diagonal().array() += 1e-12;
  }

  Vector w = project_to_simplex(w0);
  double obj = detail::qp_objective(problem, w);
  double step = 1.0 / std::max(2.0 * std::abs(max_eig), 1e-30);

  for (int it = 0; it < max_iter; ++it) {
    if (detail::qp_kkt_residual(problem, w) <= tol) {
      return (w.array().max(0.0) / w.array().max(0.0).sum()).matrix();
    }
    if (it % 8 == 7 && detail::qp_polish(problem, w, tol)) {
      return (w.array().max(0.0) / w.array().max(0.0).sum()).matrix();
    }
    const Vector grad = 2.0 * (problem.G * w) - problem.h;
    double t = step * 2.0;
    Vector candidate;
    double cand_obj = obj;
    for (int bt = 0; bt < 60; ++bt) {
      candidate = project_to_simplex(w - t * grad);
      const Vector d = candidate - w;
      cand_obj = detail::qp_objective(problem, candidate);
      if (cand_obj <= obj + grad.dot(d) + d.squaredNorm() / (2.0 * t) + 1e-16) break;
      t *= 0.5;
    }
    step = t;
    if ((candidate - w).lpNorm<Eigen::Infinity>() < 1e-17 && cand_obj >= obj) {
      // Projected gradient has stalled at float resolution; the polish step
      // is the only remaining way to move.
      if (detail::qp_polish(problem, w, tol))
        return (w.array().max(0.0) / w.array().max(0.0).sum()).matrix();
    }
    if (cand_obj <= obj) {
      w = candidate;
      obj = cand_obj;
    }
  }
  if (detail::qp_kkt_residual(problem, w) <= tol)
    return (w.array().max(0.0) / w.array().max(0.0).sum()).matrix();
  throw QpMaxIterError("solve_simplex_qp: iteration budget exhausted before KKT tolerance",
                       (w.array().max(0.0) / w.array().max(0.0).sum()).matrix());
}

}  // namespace kronlp
