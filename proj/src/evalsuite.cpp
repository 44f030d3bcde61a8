#include "mkmc/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace mkmc {

void LabeledSplit::validate(int dim) const {
  std::vector<char> in_train(static_cast<size_t>(dim), 0);
  for (int i : train_idx) {
    if (i < 0 || i >= dim) throw DimensionMismatch("split: train index out of range");
    in_train[static_cast<size_t>(i)] = 1;
  }
  for (int i : test_idx) {
    if (i < 0 || i >= dim) throw DimensionMismatch("split: test index out of range");
    if (in_train[static_cast<size_t>(i)])
      throw Error("split: train and test sets overlap");
  }
  if (labels.size() != static_cast<size_t>(dim)) {
    throw DimensionMismatch("split: labels must cover all objects");
  }
  for (int i : train_idx) {
    const int y = labels[static_cast<size_t>(i)];
    if (y != 1 && y != -1) throw Error("split: labels must be +1 or -1");
  }
}

double corr_matrix_distance(const Matrix& truth, const Matrix& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw DimensionMismatch("corr_matrix_distance: shape mismatch");
  }
  const double nt2 = truth.squaredNorm();
  const double ne2 = estimate.squaredNorm();
  if (nt2 == 0.0 || ne2 == 0.0) {
    throw ZeroNorm("corr_matrix_distance: zero Frobenius norm");
  }
  // sqrt of the product (not the product of sqrts) so that the distance of
  // a matrix to itself is exactly zero.
  return 1.0 - truth.cwiseProduct(estimate).sum() / std::sqrt(nt2 * ne2);
}

double corr_matrix_distance(const KernelSet& truth, const KernelSet& estimate) {
  if (truth.num_kernels() != estimate.num_kernels()) {
    throw DimensionMismatch("corr_matrix_distance: kernel counts differ");
  }
  double sum = 0.0;
  for (int k = 0; k < truth.num_kernels(); ++k) {
    sum += corr_matrix_distance(truth.kernels[static_cast<size_t>(k)].values(),
                                estimate.kernels[static_cast<size_t>(k)].values());
  }
  return sum / truth.num_kernels();
}

SvmModel svm_train(const Matrix& kernel, const LabeledSplit& split, double c,
                   double kkt_tol, long max_iters) {
  if (!(c > 0.0)) throw Error("svm_train: C must be positive");
  split.validate(static_cast<int>(kernel.rows()));
  const int n = static_cast<int>(split.train_idx.size());
  if (n == 0) throw Error("svm_train: empty training set");

  SvmModel model;
  model.c = c;
  model.train_idx = split.train_idx;
  model.train_labels.reserve(static_cast<size_t>(n));
  for (int i : split.train_idx) {
    model.train_labels.push_back(split.labels[static_cast<size_t>(i)]);
  }
  model.alphas.assign(static_cast<size_t>(n), 0.0);

  // Training-submatrix cache; Q(a,b) = y_a y_b K(a,b).
  Matrix ktr(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      ktr(a, b) = kernel(split.train_idx[static_cast<size_t>(a)],
                         split.train_idx[static_cast<size_t>(b)]);
  const auto& y = model.train_labels;
  auto& alpha = model.alphas;

  // Gradient of 1/2 a^T Q a - e^T a.
  std::vector<double> grad(static_cast<size_t>(n), -1.0);
  constexpr double tau = 1e-12;

  long iter = 0;
  bool reached_tol = false;
  for (; iter < max_iters; ++iter) {
    // Maximal violating pair.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    int i = -1, j = -1;
    for (int t = 0; t < n; ++t) {
      const double yg = y[static_cast<size_t>(t)] * grad[static_cast<size_t>(t)];
      const bool in_up = (y[static_cast<size_t>(t)] > 0)
                             ? alpha[static_cast<size_t>(t)] < c
                             : alpha[static_cast<size_t>(t)] > 0.0;
      const bool in_low = (y[static_cast<size_t>(t)] > 0)
                              ? alpha[static_cast<size_t>(t)] > 0.0
                              : alpha[static_cast<size_t>(t)] < c;
      if (in_up && -yg > gmax) {
        gmax = -yg;
        i = t;
      }
      if (in_low && -yg < gmin) {
        gmin = -yg;
        j = t;
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < kkt_tol) {
      reached_tol = (i < 0 || j < 0) ? true : (gmax - gmin < kkt_tol);
      break;
    }

    const double old_ai = alpha[static_cast<size_t>(i)];
    const double old_aj = alpha[static_cast<size_t>(j)];
    // In raw-kernel terms the curvature along the update direction is
    // K_ii + K_jj - 2 K_ij for both label configurations.
    if (y[static_cast<size_t>(i)] != y[static_cast<size_t>(j)]) {
      double quad = ktr(i, i) + ktr(j, j) - 2.0 * ktr(i, j);
      if (quad <= 0.0) quad = tau;  // indefinite kernel, take a tiny step
      const double delta =
          (-grad[static_cast<size_t>(i)] - grad[static_cast<size_t>(j)]) / quad;
      const double diff = old_ai - old_aj;
      alpha[static_cast<size_t>(i)] += delta;
      alpha[static_cast<size_t>(j)] += delta;
      if (diff > 0.0) {
        if (alpha[static_cast<size_t>(j)] < 0.0) {
          alpha[static_cast<size_t>(j)] = 0.0;
          alpha[static_cast<size_t>(i)] = diff;
        }
        if (alpha[static_cast<size_t>(i)] > c) {
          alpha[static_cast<size_t>(i)] = c;
          alpha[static_cast<size_t>(j)] = c - diff;
        }
      } else {
        if (alpha[static_cast<size_t>(i)] < 0.0) {
          alpha[static_cast<size_t>(i)] = 0.0;
          alpha[static_cast<size_t>(j)] = -diff;
        }
        if (alpha[static_cast<size_t>(j)] > c) {
          alpha[static_cast<size_t>(j)] = c;
          alpha[static_cast<size_t>(i)] = c + diff;
        }
      }
    } else {
      double quad = ktr(i, i) + ktr(j, j) - 2.0 * ktr(i, j);
      if (quad <= 0.0) quad = tau;
      const double delta =
          (grad[static_cast<size_t>(i)] - grad[static_cast<size_t>(j)]) / quad;
      const double sum = old_ai + old_aj;
      alpha[static_cast<size_t>(i)] -= delta;
      alpha[static_cast<size_t>(j)] += delta;
      if (sum > c) {
        if (alpha[static_cast<size_t>(i)] > c) {
          alpha[static_cast<size_t>(i)] = c;
          alpha[static_cast<size_t>(j)] = sum - c;
        }
        if (alpha[static_cast<size_t>(j)] > c) {
          alpha[static_cast<size_t>(j)] = c;
          alpha[static_cast<size_t>(i)] = sum - c;
        }
      } else {
        if (alpha[static_cast<size_t>(j)] < 0.0) {
          alpha[static_cast<size_t>(j)] = 0.0;
          alpha[static_cast<size_t>(i)] = sum;
        }
        if (alpha[static_cast<size_t>(i)] < 0.0) {
          alpha[static_cast<size_t>(i)] = 0.0;
          alpha[static_cast<size_t>(j)] = sum;
        }
      }
    }
    const double di =
        y[static_cast<size_t>(i)] * (alpha[static_cast<size_t>(i)] - old_ai);
    const double dj =
        y[static_cast<size_t>(j)] * (alpha[static_cast<size_t>(j)] - old_aj);
    for (int t = 0; t < n; ++t) {
      grad[static_cast<size_t>(t)] +=
          y[static_cast<size_t>(t)] * (ktr(t, i) * di + ktr(t, j) * dj);
    }
  }
  model.converged = reached_tol;

  // Bias from free support vectors; fall back to the KKT interval midpoint.
  double free_sum = 0.0;
  int free_count = 0;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < n; ++t) {
    const double yg = y[static_cast<size_t>(t)] * grad[static_cast<size_t>(t)];
    const double a = alpha[static_cast<size_t>(t)];
    if (a > 0.0 && a < c) {
      free_sum += yg;
      ++free_count;
    } else {
      const bool in_up =
          (y[static_cast<size_t>(t)] > 0) ? a < c : a > 0.0;
      if (in_up) {
        lb = std::max(lb, -yg);
      } else {
        ub = std::min(ub, -yg);
      }
    }
  }
  double rho;
  if (free_count > 0) {
    rho = free_sum / free_count;
  } else if (std::isfinite(lb) && std::isfinite(ub)) {
    rho = -(lb + ub) / 2.0;
  } else if (std::isfinite(lb)) {
    rho = -lb;
  } else if (std::isfinite(ub)) {
    rho = -ub;
  } else {
    // No constraint at all (single-class, alpha identically zero); pin the
    // decision sign to the common label.
    rho = -static_cast<double>(y.front());
  }
  model.bias = -rho;
  return model;
}

std::vector<double> svm_decision(const SvmModel& model, const Matrix& kernel,
                                 const std::vector<int>& test_idx) {
  const int dim = static_cast<int>(kernel.rows());
  for (int i : model.train_idx) {
    if (i < 0 || i >= dim)
      throw DimensionMismatch("svm_decision: train index out of range");
  }
  std::vector<double> scores;
  scores.reserve(test_idx.size());
  for (int j : test_idx) {
    if (j < 0 || j >= dim)
      throw DimensionMismatch("svm_decision: test index out of range");
    double s = model.bias;
    for (size_t t = 0; t < model.train_idx.size(); ++t) {
      if (model.alphas[t] == 0.0) continue;
      s += model.alphas[t] * model.train_labels[t] *
           kernel(model.train_idx[t], j);
    }
    scores.push_back(s);
  }
  return scores;
}

double roc_score(const std::vector<double>& scores,
                 const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw DimensionMismatch("roc_score: scores/labels length mismatch");
  }
  const size_t n = scores.size();
  size_t n_pos = 0, n_neg = 0;
  for (int y : labels) {
    if (y == 1) ++n_pos;
    else if (y == -1) ++n_neg;
    else throw Error("roc_score: labels must be +1 or -1");
  }
  if (n_pos == 0 || n_neg == 0) {
    throw OneClassOnly("roc_score: need at least one positive and one negative");
  }

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return scores[a] < scores[b];
  });

  // Midranks, then the Mann-Whitney statistic from the positive rank sum.
  double pos_rank_sum = 0.0;
  size_t idx = 0;
  while (idx < n) {
    size_t end = idx;
    while (end + 1 < n && scores[order[end + 1]] == scores[order[idx]]) ++end;
    const double midrank = (static_cast<double>(idx + 1) + static_cast<double>(end + 1)) / 2.0;
    for (size_t t = idx; t <= end; ++t) {
      if (labels[order[t]] == 1) pos_rank_sum += midrank;
    }
    idx = end + 1;
  }
  const double u = pos_rank_sum -
                   static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace mkmc
