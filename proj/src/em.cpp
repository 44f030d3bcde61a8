#include "mkmc/em.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace mkmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void MkmcConfig::validate() const {
  if (!(lambda > 0.0)) throw Error("MkmcConfig: lambda must be positive");
  if (!(tol > 0.0)) throw Error("MkmcConfig: tol must be positive");
  if (max_iters < 1) throw Error("MkmcConfig: max_iters must be >= 1");
  if (threads < 1) throw Error("MkmcConfig: threads must be >= 1");
}

KernelSet initialize(KernelSet kernels) {
  kernels.validate();
  const int dim = kernels.dim();
  Matrix sum = Matrix::Zero(dim, dim);
  for (auto& kernel : kernels.kernels) {
    const Partition p = kernel.partition();
    const int m = p.num_hidden();
    if (m > 0) {
      kernel.set_hidden_blocks(Matrix::Zero(p.num_visible(), m),
                               Matrix::Zero(m, m));
    }
    sum += kernel.values();
  }
  const double k = static_cast<double>(kernels.num_kernels());
  sum.diagonal().array() += kernels.lambda;
  kernels.model = sum / (kernels.lambda + k);
  return kernels;
}

namespace {

// Shared E-step body. When hidden_logdet is non-null it also reports
// log det of the conditional covariance (the Schur complement of M),
// which together with the constant log det of Q_vv gives log det of the
// completed matrix without refactorizing it: the completed kernel is
// exactly [Q_vv, Q_vv W; W^T Q_vv, S + W^T Q_vv W], whose Schur
// complement with respect to Q_vv is S.
SymmetricKernel e_step_impl(const SymmetricKernel& kernel, const Matrix& model,
                            const Partition& p, const Tolerances& tol,
                            double* hidden_logdet) {
  if (hidden_logdet) *hidden_logdet = 0.0;
  if (p.num_hidden() == 0) return kernel;
  SymmetricKernel out = kernel;
  if (p.num_visible() == 0) {
    // Degenerate limit: nothing observed, the conditional moments reduce
    // to the model itself.
    out.set_hidden_blocks(Matrix(0, p.num_hidden()), symmetrize(model));
    if (hidden_logdet) {
      try {
        *hidden_logdet = cholesky_logdet(model, tol).logdet;
      } catch (const NotPositiveDefinite&) {
        *hidden_logdet = -kInf;
      }
    }
    return out;
  }
  const BlockView m_view = partition_view(model, p);
  // Only the visible block of Q is consumed; skip gathering the rest.
  const auto& vis = p.visible();
  const int nv = p.num_visible();
  Matrix q_vv(nv, nv);
  for (int a = 0; a < nv; ++a)
    for (int b = 0; b < nv; ++b)
      q_vv(a, b) = kernel.values()(vis[static_cast<size_t>(a)],
                                   vis[static_cast<size_t>(b)]);
  const CholeskyFactor mvv = cholesky_logdet(m_view.vv, tol);
  const Matrix w = mvv.solve(m_view.vh);           // M_vv^-1 M_vh
  const Matrix q_vh = q_vv * w;                    // Q_vv M_vv^-1 M_vh
  const Matrix schur = m_view.hh - m_view.vh.transpose() * w;
  const Matrix q_hh = schur + w.transpose() * q_vh;  // w^T Q_vv w, reusing q_vh
  out.set_hidden_blocks(q_vh, symmetrize(q_hh));
  if (hidden_logdet) {
    try {
      *hidden_logdet = cholesky_logdet(symmetrize(schur), tol).logdet;
    } catch (const NotPositiveDefinite&) {
      *hidden_logdet = -kInf;
    }
  }
  return out;
}

}  // namespace

SymmetricKernel e_step(const SymmetricKernel& kernel, const Matrix& model,
                       const Partition& p, const Tolerances& tol) {
  return e_step_impl(kernel, model, p, tol, nullptr);
}

Matrix m_step(const KernelSet& kernels) {
  kernels.validate();
  const int dim = kernels.dim();
  Matrix sum = Matrix::Zero(dim, dim);
  for (const auto& kernel : kernels.kernels) sum += kernel.values();
  sum.diagonal().array() += kernels.lambda;
  return sum / (kernels.lambda + static_cast<double>(kernels.num_kernels()));
}

namespace {

// Runs the K independent E-steps against a fixed model, optionally on a
// small thread pool. Returns the largest absolute entry change and
// fills per-kernel conditional-covariance log determinants.
double e_sweep(KernelSet& kernels, const std::vector<Partition>& partitions,
               const MkmcConfig& cfg, std::vector<double>& hidden_logdets) {
  const int k = kernels.num_kernels();
  std::vector<double> deltas(static_cast<size_t>(k), 0.0);
  std::vector<std::exception_ptr> errors(static_cast<size_t>(k));
  auto work = [&](int idx) {
    try {
      SymmetricKernel updated =
          e_step_impl(kernels.kernels[static_cast<size_t>(idx)], *kernels.model,
                      partitions[static_cast<size_t>(idx)], cfg.tols,
                      &hidden_logdets[static_cast<size_t>(idx)]);
      deltas[static_cast<size_t>(idx)] =
          (updated.values() - kernels.kernels[static_cast<size_t>(idx)].values())
              .cwiseAbs()
              .maxCoeff();
      kernels.kernels[static_cast<size_t>(idx)] = std::move(updated);
    } catch (...) {
      errors[static_cast<size_t>(idx)] = std::current_exception();
    }
  };
  const int fanout = std::min(cfg.threads, k);
  if (fanout <= 1) {
    for (int i = 0; i < k; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(fanout));
    for (int t = 0; t < fanout; ++t) {
      pool.emplace_back([&, t] {
        for (int i = t; i < k; i += fanout) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (int i = 0; i < k; ++i) {
    if (errors[static_cast<size_t>(i)]) {
      try {
        std::rethrow_exception(errors[static_cast<size_t>(i)]);
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "E-step failed for kernel " << i + 1 << ": " << e.what();
        throw Error(msg.str());
      }
    }
  }
  double delta = 0.0;
  for (double d : deltas) delta = std::max(delta, d);
  return delta;
}

// Objective evaluation reusing cached log determinants of the completed
// kernels (constant visible part plus per-iteration conditional part),
// so no full K-matrix refactorization is needed per iteration.
ObjectiveValue objective_cached(const KernelSet& kernels, const Matrix& m,
                                double lambda, const Tolerances& tol,
                                const std::vector<double>& logdet_vv,
                                const std::vector<double>& hidden_logdets) {
  ObjectiveValue out;
  out.lambda = lambda;
  const CholeskyFactor m_chol = cholesky_logdet(m, tol);
  const int dim = kernels.dim();
  // M^-1 = (L^-1)^T L^-1, assembled as a symmetric rank update; cheaper
  // than solving against a full identity right-hand side.
  Matrix z = Matrix::Identity(dim, dim);
  m_chol.lower.triangularView<Eigen::Lower>().solveInPlace(z);
  Matrix m_inv = Matrix::Zero(dim, dim);
  m_inv.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  m_inv = Matrix(m_inv.selfadjointView<Eigen::Lower>());
  out.prior_kl = 0.5 * (m_inv.trace() + m_chol.logdet - dim);
  out.total = lambda * out.prior_kl;
  out.per_matrix_kl.reserve(kernels.kernels.size());
  for (size_t k = 0; k < kernels.kernels.size(); ++k) {
    const Matrix& q = kernels.kernels[k].values();
    const double logdet_q = logdet_vv[k] + hidden_logdets[k];
    const double term =
        std::isfinite(logdet_q)
            ? 0.5 *
                  (m_inv.cwiseProduct(q).sum() + m_chol.logdet - logdet_q - dim)
            : kInf;
    out.per_matrix_kl.push_back(term);
    out.total += term;
  }
  return out;
}

}  // namespace

std::pair<KernelSet, CompletionTrace> run(KernelSet kernels,
                                          const MkmcConfig& cfg) {
  cfg.validate();
  kernels.lambda = cfg.lambda;
  kernels.validate();
  for (const auto& kernel : kernels.kernels) {
    kernel.validate_observed_psd(cfg.tols);
  }
  std::vector<Partition> partitions;
  partitions.reserve(kernels.kernels.size());
  for (const auto& kernel : kernels.kernels) {
    partitions.push_back(kernel.partition());
  }

  // Visible blocks never change after this point, so their log
  // determinants can be cached for the per-iteration objective.
  std::vector<double> logdet_vv(kernels.kernels.size(), 0.0);
  for (size_t k = 0; k < kernels.kernels.size(); ++k) {
    const Partition& p = partitions[k];
    if (p.num_visible() == 0) continue;
    try {
      logdet_vv[k] =
          cholesky_logdet(partition_view(kernels.kernels[k], p).vv, cfg.tols)
              .logdet;
    } catch (const NotPositiveDefinite&) {
      logdet_vv[k] = -kInf;
    }
  }
  std::vector<double> hidden_logdets(kernels.kernels.size(), 0.0);

  kernels = initialize(std::move(kernels));
  CompletionTrace trace;
  ObjectiveValue j0 = objective(kernels, *kernels.model, cfg.lambda, cfg.tols);
  trace.iterations.push_back({0, j0, 0.0});
  double j_prev = j0.total;

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    double delta;
    try {
      delta = e_sweep(kernels, partitions, cfg, hidden_logdets);
      kernels.model = m_step(kernels);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "iteration " << iter << ": " << e.what();
      throw Error(msg.str());
    }
    ObjectiveValue j = objective_cached(kernels, *kernels.model, cfg.lambda,
                                       cfg.tols, logdet_vv, hidden_logdets);
    trace.iterations.push_back({iter, j, delta});
    const bool both_finite = std::isfinite(j.total) && std::isfinite(j_prev);
    if (both_finite &&
        std::abs(j.total - j_prev) / std::max(1.0, std::abs(j_prev)) < cfg.tol) {
      trace.converged = true;
      trace.stop_reason = StopReason::kTolerance;
      j_prev = j.total;
      break;
    }
    j_prev = j.total;
  }
  if (!trace.converged) trace.stop_reason = StopReason::kMaxIters;
  return {std::move(kernels), std::move(trace)};
}

}  // namespace mkmc
