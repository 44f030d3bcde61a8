#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "mkmc/errors.hpp"

namespace mkmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Numerical tolerances used by the matrix core. All are overridable;
/// the defaults match the documented contracts of the operations below.
struct Tolerances {
  /// Relative asymmetry tolerated on input before a matrix is rejected.
  double symmetry = 1e-8;
  /// PSD slack: smallest eigenvalue >= -psd_slack * largest eigenvalue.
  double psd_slack = 1e-8;
  /// Initial diagonal jitter is jitter_scale * trace(A)/n; it doubles on
  /// every failed factorization attempt.
  double jitter_scale = 1e-10;
  /// Number of jitter doublings before giving up (attempts: one clean,
  /// then jitter_max_doublings jittered).
  int jitter_max_doublings = 8;
};

/// Exact symmetrization, (A + A^T) / 2.
Matrix symmetrize(const Matrix& a);

/// Index split of {0..dim-1} into visible and hidden objects.
/// Both lists are strictly increasing and disjoint; together they cover
/// every index exactly once.
class Partition {
 public:
  Partition(std::vector<int> visible, std::vector<int> hidden, int dim);

  /// Builds the partition from a per-object observed flag.
  static Partition from_mask(const std::vector<bool>& mask);

  const std::vector<int>& visible() const { return visible_; }
  const std::vector<int>& hidden() const { return hidden_; }
  int dim() const { return dim_; }
  int num_visible() const { return static_cast<int>(visible_.size()); }
  int num_hidden() const { return static_cast<int>(hidden_.size()); }

 private:
  std::vector<int> visible_;
  std::vector<int> hidden_;
  int dim_;
};

/// The three distinct blocks of a symmetric matrix under a partition.
/// vv is visible x visible, vh visible x hidden, hh hidden x hidden;
/// the hv block is vh transposed and is not stored.
struct BlockView {
  Matrix vv;
  Matrix vh;
  Matrix hh;
};

/// Dense symmetric kernel matrix over dim objects with a per-object
/// visibility flag (true = the object's row and column are observed).
///
/// Symmetry is enforced on construction: inputs asymmetric beyond
/// tol.symmetry (relative, max-norm) are rejected, anything below is
/// symmetrized exactly. PSD of the observed block is checked separately
/// by validate_observed_psd(), called at I/O and solver entry points.
class SymmetricKernel {
 public:
  SymmetricKernel(Matrix values, std::vector<bool> mask,
                  const Tolerances& tol = {});

  /// Fully observed kernel.
  explicit SymmetricKernel(Matrix values, const Tolerances& tol = {});

  int dim() const { return static_cast<int>(mask_.size()); }
  const Matrix& values() const { return values_; }
  const std::vector<bool>& mask() const { return mask_; }
  Partition partition() const { return Partition::from_mask(mask_); }
  int num_observed() const;
  bool fully_observed() const { return num_observed() == dim(); }

  /// Overwrites the hidden blocks with the given estimates; visible
  /// entries are untouched. vh is visible x hidden in partition order.
  void set_hidden_blocks(const Matrix& vh, const Matrix& hh);

  /// Throws if the observed principal submatrix has an eigenvalue below
  /// -psd_slack * (largest eigenvalue).
  void validate_observed_psd(const Tolerances& tol = {}) const;

 private:
  Matrix values_;
  std::vector<bool> mask_;
};

/// Extracts the partition blocks of a symmetric matrix. The blocks are
/// index-mapped copies; the source is never physically reordered.
BlockView partition_view(const Matrix& values, const Partition& p);
BlockView partition_view(const SymmetricKernel& kernel, const Partition& p);

/// Inverse of partition_view: scatters the blocks back into a dim x dim
/// matrix. Round-trips bit-exactly.
Matrix assemble(const BlockView& view, const Partition& p);

/// Lower-triangular Cholesky factor together with the log-determinant
/// of the (possibly jittered) matrix.
struct CholeskyFactor {
  Matrix lower;
  double logdet = 0.0;
  /// Diagonal jitter that was required, 0 when the clean factorization
  /// succeeded.
  double jitter = 0.0;

  /// Solves (L L^T) x = rhs.
  Matrix solve(const Matrix& rhs) const;
};

/// Cholesky factorization with the jitter retry ladder. Throws
/// NotPositiveDefinite (with the failing pivot) once the ladder is
/// exhausted.
CholeskyFactor cholesky_logdet(const Matrix& a, const Tolerances& tol = {});

/// hh - hv vv^{-1} vh. Requires the vv block PD (after jitter).
Matrix schur_complement(const BlockView& view, const Tolerances& tol = {});

/// Solves a x = rhs for SPD a. All inverse-times-matrix products in the
/// algorithm go through here; no explicit inverses.
Matrix solve_spd(const Matrix& a, const Matrix& rhs,
                 const Tolerances& tol = {});

}  // namespace mkmc
