#pragma once

#include <string>
#include <vector>

#include "mkmc/kernel_set.hpp"

namespace mkmc {

/// Binary labels (+1/-1 per object) together with a train/test index split.
struct LabeledSplit {
  std::vector<int> labels;
  std::vector<int> train_idx;
  std::vector<int> test_idx;

  void validate(int dim) const;
};

/// Dual SVM model over the training indices of a split.
struct SvmModel {
  std::vector<double> alphas;  // one per training point, 0 <= a <= c
  double bias = 0.0;
  double c = 1.0;
  bool converged = true;
  std::vector<int> train_idx;
  std::vector<int> train_labels;
};

struct EvalReport {
  double mean_corr_distance = 0.0;
  std::vector<double> roc_per_matrix;
  double roc_model = 0.0;
  // run metadata
  std::string method;
  double missing_ratio = 0.0;
  std::uint64_t seed = 0;
};

/// Mean correlation matrix distance between two kernel sets:
/// (1/K) sum_k [1 - Tr(Q Qhat) / (|Q|_F |Qhat|_F)].
double corr_matrix_distance(const KernelSet& truth, const KernelSet& estimate);
/// Single-pair variant.
double corr_matrix_distance(const Matrix& truth, const Matrix& estimate);

/// SMO dual solver with maximal-violating-pair working set selection.
/// Accepts indefinite kernels as-is; if the KKT gap is still above the
/// stopping threshold after max_iters pair updates, the best-so-far model
/// is returned with converged = false.
SvmModel svm_train(const Matrix& kernel, const LabeledSplit& split, double c,
                   double kkt_tol = 1e-3, long max_iters = 100000);

/// score_j = sum_i alpha_i y_i K(i, j) + bias for each requested index.
std::vector<double> svm_decision(const SvmModel& model, const Matrix& kernel,
                                 const std::vector<int>& test_idx);

/// Area under the ROC curve via the Mann-Whitney rank statistic with
/// midrank tie handling: P(score_pos > score_neg) + P(tie)/2.
/// Throws OneClassOnly unless both classes are present.
double roc_score(const std::vector<double>& scores,
                 const std::vector<int>& labels);

}  // namespace mkmc
