#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mkmc/evalsuite.hpp"
#include "mkmc/kernel_set.hpp"

namespace mkmc {

enum class FileFormat {
  kCsv,     // comma separated, row major, NaN marks hidden entries
  kBinary,  // "MKMC" magic, u16 version, u32 dim, f64 LE values, mask bytes
};

/// Nested masking schedule: for every missing ratio and kernel, the list
/// of hidden objects. hidden(r1) is a subset of hidden(r2) for r1 < r2.
struct MaskSchedule {
  std::vector<double> ratios;
  /// hidden[ratio_index][kernel] -> sorted object indices.
  std::vector<std::vector<std::vector<int>>> hidden;
  std::uint64_t seed = 0;

  bool is_nested() const;
};

/// Parameters of the synthetic multi-view generator.
struct SyntheticSpec {
  int dim = 100;          // number of objects
  int num_kernels = 4;    // views
  int latent_dim = 10;
  double noise_scale = 0.5;
  std::uint64_t seed = 0;
  /// Mean of the latent feature entries. A positive value gives the Gram
  /// entries the positive background that real similarity matrices have,
  /// which is what makes mean-imputation a meaningful baseline.
  double latent_mean = 0.2;

  void validate() const;
};

// ---- kernel matrix files ----

/// Writes one kernel. CSV: dim x dim comma-separated rows, hidden entries
/// as nan. Binary: header as documented in FileFormat. When mask_path is
/// given, a sidecar is written (one 0/1 line per object, 1 = observed) and
/// the stored values are NOT NaN-ed out, so the truth stays recoverable.
void save_kernel(const SymmetricKernel& kernel,
                 const std::filesystem::path& path, FileFormat format,
                 const std::optional<std::filesystem::path>& mask_path = {});

/// Loads one kernel. Without a sidecar, the mask comes from NaN sentinels;
/// a NaN pattern that is not a union of whole rows+columns is rejected.
/// With a sidecar, the mask comes from it and values are read as stored.
SymmetricKernel load_kernel(const std::filesystem::path& path,
                            FileFormat format,
                            const std::optional<std::filesystem::path>& mask_path = {});

KernelSet load_kernel_set(const std::vector<std::filesystem::path>& paths,
                          FileFormat format,
                          const std::vector<std::filesystem::path>& mask_paths = {});

std::vector<int> load_labels(const std::filesystem::path& path);
void save_labels(const std::vector<int>& labels,
                 const std::filesystem::path& path);

// ---- experimental protocol ----

/// Draws the nested schedule: all (object, kernel) slots are shuffled once
/// and hidden(r) takes the first floor(r * dim * K) of them.
MaskSchedule make_mask_schedule(int dim, int num_kernels,
                                const std::vector<double>& ratios,
                                std::uint64_t seed);

/// Applies one row of the schedule to a fully observed kernel set.
KernelSet apply_masks(const KernelSet& truth,
                      const std::vector<std::vector<int>>& hidden_per_kernel);

/// Latent features X (dim x latent_dim, mean latent_mean, unit variance);
/// view k gets X + noise_scale * N(0,1) and its Gram matrix. Labels are
/// the sign of a random linear functional of X.
std::pair<KernelSet, std::vector<int>> synth_kernel_set(const SyntheticSpec& spec);

/// Random n_train/test split; when nested_with is given its training set
/// is retained and only the remainder is drawn.
LabeledSplit make_split(int dim, int n_train, std::uint64_t seed,
                        const std::optional<LabeledSplit>& nested_with = {});

}  // namespace mkmc
