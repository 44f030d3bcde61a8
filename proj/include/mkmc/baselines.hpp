#pragma once

#include "mkmc/kernel_set.hpp"

namespace mkmc {

/// Fills hidden rows/columns with zeros; visible entries untouched.
SymmetricKernel zero_impute(const SymmetricKernel& kernel);

/// Fills each visible-row x hidden entry with the mean of that row's
/// visible entries and every hidden x hidden entry with the grand mean
/// of the visible block. Works on Gram entries only; the result is not
/// projected to PSD even if indefinite.
/// Throws NoObservedData when nothing is observed.
SymmetricKernel mean_impute(const SymmetricKernel& kernel);

/// Model matrix over imputed kernels, (lambda I + sum Q) / (lambda + K).
/// Same formula and implementation as the M-step.
Matrix combine_model(const KernelSet& kernels);

}  // namespace mkmc
