#pragma once

// Independent oracles used by the unit and acceptance suites. Everything
// here deliberately takes the slow, explicit route (dense NM x NM
// Kronecker matrices, O(n^2) pair counting, finite-width Monte-Carlo
// networks) so the factor-space implementations have something honest to
// be checked against. Test-only: nothing in src/ may include this.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "kronlp/types.hpp"

namespace oracles {

using kronlp::Index;
using kronlp::Matrix;
using kronlp::Vector;

// Column-stacking vec and its inverse.
inline Vector vec(const Matrix& M) {
  return Eigen::Map<const Vector>(M.data(), M.size());
}

inline Matrix unvec(const Vector& v, Index rows, Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

// Explicit Kronecker product A (x) B.
inline Matrix dense_kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

// Dense Kron-RLS prediction K (K + lambda I)^{-1} vec(F), K = K_S (x) K_D.
inline Matrix dense_kron_rls(const Matrix& K_D, const Matrix& K_S, const Matrix& F,
                             double lambda) {
  const Matrix K = dense_kron(K_S, K_D);
  const Matrix system = K + lambda * Matrix::Identity(K.rows(), K.cols());
  const Vector solution = K * system.ldlt().solve(vec(F));
  return unvec(solution, F.rows(), F.cols());
}

// Dense dual (K + lambda I)^{-1} vec(F).
inline Matrix dense_kron_rls_dual(const Matrix& K_D, const Matrix& K_S, const Matrix& F,
                                  double lambda) {
  const Matrix K = dense_kron(K_S, K_D);
  const Matrix system = K + lambda * Matrix::Identity(K.rows(), K.cols());
  return unvec(system.ldlt().solve(vec(F)), F.rows(), F.cols());
}

// Dense consensus solve ((1+sigma) I - sigma A (x) B)^{-1} vec(R); A acts on
// columns (side-effect space), B on rows (drug space).
inline Matrix dense_consensus_solve(const Matrix& A, const Matrix& B, const Matrix& R,
                                    double sigma) {
  const Index nm = A.rows() * B.rows();
  const Matrix system =
      (1.0 + sigma) * Matrix::Identity(nm, nm) - sigma * dense_kron(A, B);
  return unvec(system.fullPivLu().solve(vec(R)), B.rows(), A.rows());
}

// O(n^2) pair-counting AUC; same final expression as the implementation so
// agreement is exact.
inline double brute_force_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::int64_t concordant = 0, tied = 0, n_pos = 0, n_neg = 0;
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (labels[p] == 0) continue;
    ++n_pos;
    for (std::size_t q = 0; q < scores.size(); ++q) {
      if (labels[q] != 0) continue;
      if (scores[p] > scores[q]) ++concordant;
      if (scores[p] == scores[q]) ++tied;
    }
  }
  for (int label : labels) n_neg += label == 0 ? 1 : 0;
  return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// AUPR by explicit threshold enumeration over the unique scores.
inline double brute_force_aupr(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<double>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  std::int64_t n_pos = 0;
  for (int label : labels) n_pos += label != 0 ? 1 : 0;
  double area = 0.0;
  double prev_recall = 0.0;
  for (double threshold : thresholds) {
    std::int64_t tp = 0, fp = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      if (scores[k] >= threshold) {
        if (labels[k] != 0)
          ++tp;
        else
          ++fp;
      }
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

// Minimum of `objective` over the V=3 simplex grid with the given step.
template <typename Objective>
double simplex_grid_min(const Objective& objective, double step = 0.01) {
  const int n = static_cast<int>(std::llround(1.0 / step));
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; a + b <= n; ++b) {
      Vector w(3);
      w << static_cast<double>(a) / n, static_cast<double>(b) / n,
          static_cast<double>(n - a - b) / n;
      best = std::min(best, objective(w));
    }
  }
  return best;
}

// Spectral radius by power iteration on a symmetric matrix.
inline double power_iteration_radius(const Matrix& A, int iters = 2000) {
  Vector x = Vector::Ones(A.rows()).normalized();
  double radius = 0.0;
  for (int it = 0; it < iters; ++it) {
    const Vector y = A * x;
    radius = y.norm();
    if (radius == 0.0) return 0.0;
    x = y / radius;
  }
  return radius;
}

// --- Finite-width Monte-Carlo tangent-kernel oracle ------------------------
//
// For a fully connected rectifier network of `depth` hidden layers at width
// `width`, estimates E<grad f(x), grad f(y)> over parameter draws via the
// layerwise identity <grad,grad> = sum_l <delta_l(x), delta_l(y)> *
// <a_{l-1}(x), a_{l-1}(y)>. Values are normalized to a unit diagonal the
// same way the analytic kernel is.

struct MonteCarloNtk {
  double mean = 0.0;
  double std_error = 0.0;
};

inline MonteCarloNtk mc_ntk(const Vector& x, const Vector& y, int depth, Index width,
                            int draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto fill = [&](Matrix& W) {
    for (Index i = 0; i < W.rows(); ++i)
      for (Index j = 0; j < W.cols(); ++j) W(i, j) = gauss(rng);
  };
  const double layer_scale = std::sqrt(2.0 / static_cast<double>(width));

  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(draws));
  for (int draw = 0; draw < draws; ++draw) {
    std::vector<Matrix> weights;
    weights.emplace_back(width, x.size());
    fill(weights.back());
    for (int l = 1; l < depth; ++l) {
      weights.emplace_back(width, width);
      fill(weights.back());
    }
    Vector readout(width);
    for (Index i = 0; i < width; ++i) readout[i] = gauss(rng);

    struct Pass {
      std::vector<Vector> activations;  // a_0 = input, a_l post-rectifier
      std::vector<Vector> gates;        // rectifier derivative per layer
    };
    auto forward = [&](const Vector& input) {
      Pass pass;
      pass.activations.push_back(input);
      Vector h;
      for (int l = 0; l < depth; ++l) {
        const double scale = l == 0 ? 1.0 : layer_scale;
        h = scale * (weights[static_cast<std::size_t>(l)] * pass.activations.back());
        pass.gates.push_back((h.array() > 0.0).cast<double>());
        pass.activations.push_back(h.cwiseMax(0.0));
      }
      return pass;
    };
    auto backward = [&](const Pass& pass) {
      std::vector<Vector> deltas(static_cast<std::size_t>(depth));
      Vector delta = layer_scale * readout.cwiseProduct(pass.gates.back());
      deltas[static_cast<std::size_t>(depth - 1)] = delta;
      for (int l = depth - 1; l > 0; --l) {
        delta = layer_scale *
                (weights[static_cast<std::size_t>(l)].transpose() * delta)
                    .cwiseProduct(pass.gates[static_cast<std::size_t>(l - 1)]);
        deltas[static_cast<std::size_t>(l - 1)] = delta;
      }
      return deltas;
    };
    auto tangent = [&](const Pass& px, const std::vector<Vector>& dx, const Pass& py,
                       const std::vector<Vector>& dy) {
      double total = 0.0;
      for (int l = 0; l < depth; ++l) {
        // Each weight matrix W_l enters h_l with prefactor c_l (1 for the
        // input layer, sqrt(2/width) after), so its gradient block
        // contributes c_l^2 <delta_l(x), delta_l(y)> <a_{l-1}(x), a_{l-1}(y)>.
        const double c2 = l == 0 ? 1.0 : layer_scale * layer_scale;
        total += c2 * dx[static_cast<std::size_t>(l)].dot(dy[static_cast<std::size_t>(l)]) *
                 px.activations[static_cast<std::size_t>(l)].dot(
                     py.activations[static_cast<std::size_t>(l)]);
      }
      // Readout weights contribute the last-layer activation product.
      total += layer_scale * layer_scale * px.activations.back().dot(py.activations.back());
      return total;
    };

    const Pass px = forward(x);
    const Pass py = forward(y);
    const auto dx = backward(px);
    const auto dy = backward(py);
    const double kxy = tangent(px, dx, py, dy);
    const double kxx = tangent(px, dx, px, dx);
    const double kyy = tangent(py, dy, py, dy);
    samples.push_back(kxy / std::sqrt(kxx * kyy));
  }

  MonteCarloNtk out;
  for (double s : samples) out.mean += s;
  out.mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double s : samples) var += (s - out.mean) * (s - out.mean);
  var /= static_cast<double>(samples.size() - 1);
  out.std_error = std::sqrt(var / static_cast<double>(samples.size()));
  return out;
}

// Deterministic random helpers.
inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = scale * gauss(rng);
  return M;
}

inline Matrix random_symmetric(Index n, std::mt19937_64& rng) {
  const Matrix M = random_matrix(n, n, rng);
  return (M + M.transpose()) / 2.0;
}

// Random PSD kernel with unit diagonal.
inline Matrix random_kernel(Index n, std::mt19937_64& rng) {
  const Matrix M = random_matrix(n, n + 2, rng);
  Matrix K = M * M.transpose();
  Vector d = K.diagonal().cwiseMax(1e-8).array().rsqrt();
  K = d.asDiagonal() * K * d.asDiagonal();
  return (K + K.transpose()) / 2.0;
}

inline Matrix random_binary(Index rows, Index cols, std::mt19937_64& rng, double density = 0.4) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = uniform(rng) < density ? 1.0 : 0.0;
  return M;
}

}  // namespace oracles
