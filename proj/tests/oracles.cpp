#include "oracles.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace oracle {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Matrix random_spd(Rng& rng, int n, double ridge) {
  Matrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = rng.normal();
  Matrix a = b * b.transpose();
  a.diagonal().array() += ridge;
  return mkmc::symmetrize(a);
}

Matrix random_symmetric(Rng& rng, int n) {
  Matrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = rng.normal();
  return mkmc::symmetrize(b);
}

double logdet_eig(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  double sum = 0.0;
  for (int i = 0; i < eig.eigenvalues().size(); ++i) {
    const double v = eig.eigenvalues()(i);
    if (v <= 0.0) return -kInf;
    sum += std::log(v);
  }
  return sum;
}

Matrix inverse_eig(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  return eig.eigenvectors() *
         eig.eigenvalues().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

double kl_direct(const Matrix& q, const Matrix& m) {
  const int n = static_cast<int>(q.rows());
  const double trace = (inverse_eig(m) * q).trace();
  return 0.5 * (trace + logdet_eig(m) - logdet_eig(q) - n);
}

double objective_direct(const std::vector<Matrix>& kernels, const Matrix& m,
                        double lambda) {
  const int n = static_cast<int>(m.rows());
  double j = lambda * kl_direct(Matrix::Identity(n, n), m);
  for (const auto& q : kernels) j += kl_direct(q, m);
  return j;
}

Vector minimize_bb(const std::function<double(const Vector&)>& f, Vector x,
                   int max_iters, double grad_tol) {
  const int p = static_cast<int>(x.size());
  auto gradient = [&](const Vector& at) {
    Vector g(p);
    const double h = 1e-6;
    Vector probe = at;
    for (int i = 0; i < p; ++i) {
      const double orig = probe(i);
      probe(i) = orig + h;
      const double fp = f(probe);
      probe(i) = orig - h;
      const double fm = f(probe);
      probe(i) = orig;
      g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
  };

  double fx = f(x);
  Vector g = gradient(x);
  double step = 1e-3;
  Vector x_prev = x;
  Vector g_prev = g;
  bool have_prev = false;
  for (int it = 0; it < max_iters; ++it) {
    if (g.cwiseAbs().maxCoeff() < grad_tol) break;
    if (have_prev) {
      const Vector dx = x - x_prev;
      const Vector dg = g - g_prev;
      const double denom = dx.dot(dg);
      if (denom > 0.0) step = dx.squaredNorm() / denom;
      step = std::min(std::max(step, 1e-12), 1e6);
    }
    // Backtrack until finite and decreasing.
    double s = step;
    Vector x_new;
    double f_new;
    int bt = 0;
    for (; bt < 60; ++bt) {
      x_new = x - s * g;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-15 * std::abs(fx)) break;
      s *= 0.5;
    }
    if (bt == 60) break;  // no further progress possible
    x_prev = x;
    g_prev = g;
    x = x_new;
    fx = f_new;
    g = gradient(x);
    have_prev = true;
  }
  return x;
}

Matrix minimize_hidden(const Matrix& q_start, const std::vector<int>& visible,
                       const std::vector<int>& hidden, const Matrix& m,
                       int max_iters, double grad_tol) {
  const int n = static_cast<int>(visible.size());
  const int mm = static_cast<int>(hidden.size());
  const int p = n * mm + mm * (mm + 1) / 2;
  const Matrix m_inv = inverse_eig(m);

  auto unpack = [&](const Vector& x) {
    Matrix q = q_start;
    int idx = 0;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < mm; ++b) {
        q(visible[static_cast<size_t>(a)], hidden[static_cast<size_t>(b)]) = x(idx);
        q(hidden[static_cast<size_t>(b)], visible[static_cast<size_t>(a)]) = x(idx);
        ++idx;
      }
    }
    for (int a = 0; a < mm; ++a) {
      for (int b = a; b < mm; ++b) {
        q(hidden[static_cast<size_t>(a)], hidden[static_cast<size_t>(b)]) = x(idx);
        q(hidden[static_cast<size_t>(b)], hidden[static_cast<size_t>(a)]) = x(idx);
        ++idx;
      }
    }
    return q;
  };

  // Only the Q-dependent part of J matters here.
  auto f = [&](const Vector& x) {
    const Matrix q = unpack(x);
    const double ld = logdet_eig(q);
    if (!std::isfinite(ld)) return kInf;
    return 0.5 * (m_inv.cwiseProduct(q).sum() - ld);
  };

  // Analytic gradient of f: d f / d Q = (M^-1 - Q^-1) / 2 on the full
  // matrix; a parameter steering a symmetric off-diagonal pair picks up
  // both entries. This is generic matrix calculus, independent of the
  // library's conditional-expectation formulas.
  auto gradient = [&](const Vector& x) {
    const Matrix g_full = 0.5 * (m_inv - inverse_eig(unpack(x)));
    Vector g(p);
    int idx = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < mm; ++b)
        g(idx++) = 2.0 * g_full(visible[static_cast<size_t>(a)],
                                hidden[static_cast<size_t>(b)]);
    for (int a = 0; a < mm; ++a)
      for (int b = a; b < mm; ++b)
        g(idx++) = (a == b ? 1.0 : 2.0) *
                   g_full(hidden[static_cast<size_t>(a)],
                          hidden[static_cast<size_t>(b)]);
    return g;
  };

  Vector x(p);
  int idx = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < mm; ++b)
      x(idx++) = q_start(visible[static_cast<size_t>(a)], hidden[static_cast<size_t>(b)]);
  for (int a = 0; a < mm; ++a)
    for (int b = a; b < mm; ++b)
      x(idx++) = q_start(hidden[static_cast<size_t>(a)], hidden[static_cast<size_t>(b)]);

  // Damped Newton iteration on the analytic gradient. The Hessian is
  // finite-differenced from that gradient, so the optimum is still
  // pinned by generic matrix calculus alone; the Hessian only sets the
  // convergence rate, never the fixed point.
  double fx = f(x);
  Vector g = gradient(x);
  for (int it = 0; it < max_iters; ++it) {
    if (g.cwiseAbs().maxCoeff() < grad_tol) break;
    Matrix hess(p, p);
    const double hstep = 1e-5 * std::max(1.0, x.cwiseAbs().maxCoeff());
    for (int j = 0; j < p; ++j) {
      Vector xp = x;
      Vector xm = x;
      xp(j) += hstep;
      xm(j) -= hstep;
      hess.col(j) = (gradient(xp) - gradient(xm)) / (2.0 * hstep);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    double mu = 0.0;
    bool moved = false;
    for (int tries = 0; tries < 40 && !moved; ++tries) {
      Matrix damped = hess;
      damped.diagonal().array() += mu;
      const Vector d = Eigen::LDLT<Matrix>(damped).solve(-g);
      double s = 1.0;
      for (int bt = 0; bt < 40; ++bt) {
        const Vector x_new = x + s * d;
        const double f_new = f(x_new);
        if (std::isfinite(f_new) && f_new <= fx) {
          x = x_new;
          fx = f_new;
          moved = true;
          break;
        }
        s *= 0.5;
      }
      mu = (mu == 0.0) ? 1e-8 : 10.0 * mu;
    }
    if (!moved) break;
    g = gradient(x);
  }
  return unpack(x);
}

double roc_pairs(const std::vector<double>& scores,
                 const std::vector<int>& labels) {
  double wins = 0.0;
  long pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != -1) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

std::vector<double> qp_reference(const Matrix& train_kernel,
                                 const std::vector<int>& labels, double c,
                                 int iters) {
  const int n = static_cast<int>(labels.size());
  Matrix q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      q(i, j) = labels[static_cast<size_t>(i)] * labels[static_cast<size_t>(j)] *
                train_kernel(i, j);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
  const double lip = std::max(1.0, eig.eigenvalues().maxCoeff());
  const double step = 1.0 / lip;

  // Projection onto the box intersected with y^T a = 0, by bisection on
  // the multiplier of the equality constraint.
  auto project = [&](const Vector& v) {
    auto constraint = [&](double mu) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        const double y = labels[static_cast<size_t>(i)];
        const double a = std::clamp(v(i) - mu * y, 0.0, c);
        s += y * a;
      }
      return s;
    };
    double lo = -1e6, hi = 1e6;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (constraint(mid) > 0.0) lo = mid;
      else hi = mid;
    }
    const double mu = 0.5 * (lo + hi);
    Vector a(n);
    for (int i = 0; i < n; ++i) {
      a(i) = std::clamp(v(i) - mu * labels[static_cast<size_t>(i)], 0.0, c);
    }
    return a;
  };

  Vector a = project(Vector::Zero(n));
  for (int it = 0; it < iters; ++it) {
    const Vector grad = q * a - Vector::Ones(n);
    a = project(a - step * grad);
  }
  return {a.data(), a.data() + n};
}

double svm_dual_objective(const std::vector<double>& alphas,
                          const Matrix& train_kernel,
                          const std::vector<int>& labels) {
  const int n = static_cast<int>(labels.size());
  double quad = 0.0;
  double lin = 0.0;
  for (int i = 0; i < n; ++i) {
    lin += alphas[static_cast<size_t>(i)];
    for (int j = 0; j < n; ++j) {
      quad += alphas[static_cast<size_t>(i)] * alphas[static_cast<size_t>(j)] *
              labels[static_cast<size_t>(i)] * labels[static_cast<size_t>(j)] *
              train_kernel(i, j);
    }
  }
  return 0.5 * quad - lin;
}

Matrix mean_impute_loops(const Matrix& values, const std::vector<bool>& mask) {
  const int dim = static_cast<int>(values.rows());
  std::vector<int> vis;
  for (int i = 0; i < dim; ++i)
    if (mask[static_cast<size_t>(i)]) vis.push_back(i);
  const double nv = static_cast<double>(vis.size());

  double grand = 0.0;
  for (int i : vis)
    for (int j : vis) grand += values(i, j);
  grand /= nv * nv;

  Matrix out = values;
  for (int j = 0; j < dim; ++j) {
    if (mask[static_cast<size_t>(j)]) continue;
    for (int i = 0; i < dim; ++i) {
      if (mask[static_cast<size_t>(i)]) {
        double s = 0.0;
        for (int t : vis) s += values(i, t);
        out(i, j) = s / nv;
        out(j, i) = out(i, j);
      } else {
        out(i, j) = grand;
      }
    }
  }
  return out;
}

}  // namespace oracle
