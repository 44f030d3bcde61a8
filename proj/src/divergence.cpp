#include "mkmc/divergence.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mkmc {

void KernelSet::validate() const {
  if (kernels.empty()) throw Error("KernelSet: K >= 1 required");
  if (!(lambda > 0.0)) throw Error("KernelSet: lambda must be positive");
  const int d = kernels.front().dim();
  for (const auto& k : kernels) {
    if (k.dim() != d) {
      std::ostringstream msg;
      msg << "KernelSet: kernel dims disagree (" << k.dim() << " vs " << d << ")";
      throw DimensionMismatch(msg.str());
    }
  }
  if (model && (model->rows() != d || model->cols() != d)) {
    throw DimensionMismatch("KernelSet: model dim disagrees with kernels");
  }
}

double gaussian_kl(const Matrix& q, const Matrix& m, const Tolerances& tol) {
  if (q.rows() != m.rows() || q.cols() != m.cols()) {
    std::ostringstream msg;
    msg << "gaussian_kl: shapes " << q.rows() << "x" << q.cols() << " vs "
        << m.rows() << "x" << m.cols();
    throw DimensionMismatch(msg.str());
  }
  const int dim = static_cast<int>(q.rows());
  const CholeskyFactor m_chol = cholesky_logdet(m, tol);
  double logdet_q;
  try {
    logdet_q = cholesky_logdet(q, tol).logdet;
  } catch (const NotPositiveDefinite& e) {
    throw QSingular(std::string("gaussian_kl: singular first argument: ") +
                    e.what());
  }
  const double trace_term = m_chol.solve(q).trace();
  return 0.5 * (trace_term + m_chol.logdet - logdet_q - dim);
}

ObjectiveValue objective(const KernelSet& kernels, const Matrix& m,
                         double lambda, const Tolerances& tol) {
  kernels.validate();
  constexpr double inf = std::numeric_limits<double>::infinity();
  ObjectiveValue out;
  out.lambda = lambda;
  const CholeskyFactor m_chol = cholesky_logdet(m, tol);
  const int dim = kernels.dim();
  // One inverse of m, then each KL term is an elementwise product.
  const Matrix m_inv = m_chol.solve(Matrix::Identity(dim, dim));

  out.prior_kl = 0.5 * (m_inv.trace() + m_chol.logdet - dim);
  out.total = lambda * out.prior_kl;
  out.per_matrix_kl.reserve(kernels.kernels.size());
  for (size_t k = 0; k < kernels.kernels.size(); ++k) {
    const Matrix& q = kernels.kernels[k].values();
    double term;
    try {
      const double logdet_q = cholesky_logdet(q, tol).logdet;
      term = 0.5 * (m_inv.cwiseProduct(q).sum() + m_chol.logdet - logdet_q - dim);
    } catch (const NotPositiveDefinite&) {
      term = inf;  // zero-imputed matrices can be singular at start
    }
    out.per_matrix_kl.push_back(term);
    out.total += term;
  }
  return out;
}

}  // namespace mkmc
