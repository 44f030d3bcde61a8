#pragma once

#include <optional>
#include <vector>

#include "mkmc/symmat.hpp"

namespace mkmc {

/// K symmetric kernels over the same objects plus the fused model matrix.
/// The model is absent until initialization fills it in.
struct KernelSet {
  std::vector<SymmetricKernel> kernels;
  std::optional<Matrix> model;
  double lambda = 0.001;

  int dim() const { return kernels.empty() ? 0 : kernels.front().dim(); }
  int num_kernels() const { return static_cast<int>(kernels.size()); }

  /// Throws unless all kernels share one dimension, K >= 1 and lambda > 0.
  void validate() const;
};

}  // namespace mkmc
