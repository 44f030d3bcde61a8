#pragma once

#include <vector>

#include "mkmc/kernel_set.hpp"
#include "mkmc/symmat.hpp"

namespace mkmc {

/// The penalized objective J and its constituents, all in nats.
/// total = lambda * prior_kl + sum(per_matrix_kl).
/// A singular kernel matrix reports +infinity for its term and for the
/// total; any finite value counts as an improvement over that.
struct ObjectiveValue {
  double total = 0.0;
  std::vector<double> per_matrix_kl;
  double prior_kl = 0.0;
  double lambda = 0.0;
};

/// KL divergence between zero-mean Gaussians with covariances q and m:
/// (Tr(m^-1 q) + logdet m - logdet q - dim) / 2.
/// Throws NotPositiveDefinite if m cannot be factored, QSingular if q is
/// singular beyond the jitter budget.
double gaussian_kl(const Matrix& q, const Matrix& m, const Tolerances& tol = {});

/// Evaluates J over a fully populated kernel set against model matrix m.
/// The constant -logdet Q and -dim terms are kept so that the monotone
/// decrease of J is observable as stated.
ObjectiveValue objective(const KernelSet& kernels, const Matrix& m,
                         double lambda, const Tolerances& tol = {});

}  // namespace mkmc
