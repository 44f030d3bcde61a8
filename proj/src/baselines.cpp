#include "mkmc/baselines.hpp"

#include "mkmc/em.hpp"

namespace mkmc {

SymmetricKernel zero_impute(const SymmetricKernel& kernel) {
  const Partition p = kernel.partition();
  if (p.num_hidden() == 0) return kernel;
  SymmetricKernel out = kernel;
  out.set_hidden_blocks(Matrix::Zero(p.num_visible(), p.num_hidden()),
                        Matrix::Zero(p.num_hidden(), p.num_hidden()));
  return out;
}

SymmetricKernel mean_impute(const SymmetricKernel& kernel) {
  const Partition p = kernel.partition();
  if (p.num_hidden() == 0) return kernel;
  if (p.num_visible() == 0) {
    throw NoObservedData("mean_impute: kernel has no observed objects");
  }
  const int n = p.num_visible();
  const int m = p.num_hidden();
  const Matrix vv = partition_view(kernel, p).vv;
  const double grand_mean = vv.sum() / (static_cast<double>(n) * n);
  const Vector row_means = vv.rowwise().sum() / static_cast<double>(n);

  SymmetricKernel out = kernel;
  out.set_hidden_blocks(row_means.replicate(1, m),
                        Matrix::Constant(m, m, grand_mean));
  return out;
}

Matrix combine_model(const KernelSet& kernels) { return m_step(kernels); }

}  // namespace mkmc
