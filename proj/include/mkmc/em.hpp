#pragma once

#include <utility>
#include <vector>

#include "mkmc/divergence.hpp"
#include "mkmc/kernel_set.hpp"

namespace mkmc {

struct MkmcConfig {
  double lambda = 0.001;
  /// Convergence on |J_t - J_{t-1}| / max(1, |J_{t-1}|).
  double tol = 1e-6;
  int max_iters = 200;
  /// Parallel fan-out for the per-kernel E-steps within one iteration.
  int threads = 1;
  Tolerances tols;

  void validate() const;
};

enum class StopReason {
  kTolerance,
  kMaxIters,
};

struct TraceEntry {
  int iter = 0;
  ObjectiveValue objective;
  /// Largest absolute entry change over all kernels in this iteration.
  double max_block_delta = 0.0;
};

/// Per-iteration record of a completion run. Entry 0 is the state right
/// after initialization (no E/M step applied yet). Across finite-valued
/// entries, objective.total never increases.
struct CompletionTrace {
  std::vector<TraceEntry> iterations;
  bool converged = false;
  StopReason stop_reason = StopReason::kMaxIters;
};

/// Zero-imputes every kernel's hidden entries and sets the model matrix
/// to (sum Q + lambda I) / (lambda + K).
KernelSet initialize(KernelSet kernels);

/// Closed-form conditional update of one kernel's hidden blocks given
/// the model:
///   Q_vh = Q_vv M_vv^-1 M_vh
///   Q_hh = M_h|v + M_hv M_vv^-1 Q_vv M_vv^-1 M_vh
/// The visible block is untouched bit-exactly. A kernel with zero
/// observed objects receives the model wholesale.
SymmetricKernel e_step(const SymmetricKernel& kernel, const Matrix& model,
                       const Partition& p, const Tolerances& tol = {});

/// (lambda I + sum Q) / (lambda + K) over the fully populated kernels.
Matrix m_step(const KernelSet& kernels);

/// Full completion loop: alternating per-kernel E-steps (all against the
/// model from the previous M-step) and the M-step, until the relative
/// change of J drops below cfg.tol or cfg.max_iters is reached.
std::pair<KernelSet, CompletionTrace> run(KernelSet kernels,
                                          const MkmcConfig& cfg = {});

}  // namespace mkmc
