#include "mkmc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "mkmc/rng.hpp"

namespace mkmc {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Little-endian raw I/O; this code only targets little-endian hosts.
template <typename T>
void write_raw(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const fs::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("truncated binary kernel file: " + path.string(), 0, 0);
  return v;
}

std::vector<bool> mask_from_nan_pattern(const Matrix& values,
                                        const fs::path& path) {
  const int dim = static_cast<int>(values.rows());
  std::vector<bool> mask(static_cast<size_t>(dim), true);
  for (int i = 0; i < dim; ++i) {
    bool all_nan = true;
    for (int j = 0; j < dim; ++j) {
      if (!std::isnan(values(i, j))) {
        all_nan = false;
        break;
      }
    }
    if (all_nan) mask[static_cast<size_t>(i)] = false;
  }
  // Every NaN must be explained by a hidden row or column.
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const bool hidden = !mask[static_cast<size_t>(i)] || !mask[static_cast<size_t>(j)];
      if (std::isnan(values(i, j)) != hidden) {
        std::ostringstream msg;
        msg << path.string() << ": NaN pattern at (" << i << "," << j
            << ") is not a whole hidden row/column";
        throw InvalidMaskPattern(msg.str());
      }
    }
  }
  return mask;
}

std::vector<bool> load_mask_sidecar(const fs::path& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mask file: " + path.string(), 0, 0);
  std::vector<bool> mask;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line == "1") {
      mask.push_back(true);
    } else if (line == "0") {
      mask.push_back(false);
    } else {
      throw ParseError("mask file entries must be 0 or 1: " + path.string(),
                       line_no, 1);
    }
  }
  if (static_cast<int>(mask.size()) != dim) {
    std::ostringstream msg;
    msg << path.string() << ": mask has " << mask.size() << " lines, expected "
        << dim;
    throw ParseError(msg.str(), line_no, 1);
  }
  return mask;
}

void save_mask_sidecar(const std::vector<bool>& mask, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mask file: " + path.string());
  for (bool m : mask) out << (m ? '1' : '0') << '\n';
}

}  // namespace

bool MaskSchedule::is_nested() const {
  for (size_t r = 1; r < hidden.size(); ++r) {
    for (size_t k = 0; k < hidden[r].size(); ++k) {
      const auto& small = hidden[r - 1][k];
      const auto& big = hidden[r][k];
      if (!std::includes(big.begin(), big.end(), small.begin(), small.end())) {
        return false;
      }
    }
  }
  return true;
}

void SyntheticSpec::validate() const {
  if (dim < 2) throw Error("SyntheticSpec: dim must be >= 2");
  if (num_kernels < 1) throw Error("SyntheticSpec: need at least one kernel");
  if (latent_dim < 1) throw Error("SyntheticSpec: latent_dim must be >= 1");
  if (noise_scale < 0.0) throw Error("SyntheticSpec: noise_scale must be >= 0");
}

void save_kernel(const SymmetricKernel& kernel, const fs::path& path,
                 FileFormat format,
                 const std::optional<fs::path>& mask_path) {
  const int dim = kernel.dim();
  if (format == FileFormat::kCsv) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write kernel file: " + path.string());
    const bool nan_sentinels = !mask_path.has_value();
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        if (j) out << ',';
        const bool hidden = !kernel.mask()[static_cast<size_t>(i)] ||
                            !kernel.mask()[static_cast<size_t>(j)];
        if (nan_sentinels && hidden) {
          out << "nan";
        } else {
          out << format_double(kernel.values()(i, j));
        }
      }
      out << '\n';
    }
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write kernel file: " + path.string());
    out.write("MKMC", 4);
    write_raw<std::uint16_t>(out, 1);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) write_raw<double>(out, kernel.values()(i, j));
    for (int i = 0; i < dim; ++i) {
      out.put(kernel.mask()[static_cast<size_t>(i)] ? char(1) : char(0));
    }
  }
  if (mask_path) save_mask_sidecar(kernel.mask(), *mask_path);
}

SymmetricKernel load_kernel(const fs::path& path, FileFormat format,
                            const std::optional<fs::path>& mask_path) {
  Matrix values;
  std::vector<bool> mask;
  if (format == FileFormat::kCsv) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open kernel file: " + path.string(), 0, 0);
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    bool maybe_header = true;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string cell;
      int col = 0;
      bool bad_token = false;
      while (std::getline(ss, cell, ',')) {
        ++col;
        const char* start = cell.c_str();
        char* end = nullptr;
        const double v = std::strtod(start, &end);
        while (end && *end == ' ') ++end;
        if (end == start || (end && *end != '\0')) {
          if (maybe_header) {
            bad_token = true;  // tolerated once, as a header line
            break;
          }
          std::ostringstream msg;
          msg << path.string() << ": cannot parse '" << cell << "'";
          throw ParseError(msg.str(), line_no, col);
        }
        row.push_back(v);
      }
      maybe_header = false;
      if (bad_token) continue;
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("empty kernel file: " + path.string(), 0, 0);
    const size_t dim = rows.size();
    values.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (size_t i = 0; i < dim; ++i) {
      if (rows[i].size() != dim) {
        std::ostringstream msg;
        msg << path.string() << ": row " << i + 1 << " has " << rows[i].size()
            << " columns, expected " << dim;
        throw ParseError(msg.str(), static_cast<int>(i + 1),
                         static_cast<int>(rows[i].size()));
      }
      for (size_t j = 0; j < dim; ++j)
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open kernel file: " + path.string(), 0, 0);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "MKMC", 4) != 0) {
      throw ParseError("bad magic in kernel file: " + path.string(), 0, 0);
    }
    const auto version = read_raw<std::uint16_t>(in, path);
    if (version != 1) {
      std::ostringstream msg;
      msg << path.string() << ": unsupported version " << version;
      throw ParseError(msg.str(), 0, 0);
    }
    const auto dim = read_raw<std::uint32_t>(in, path);
    values.resize(dim, dim);
    for (std::uint32_t i = 0; i < dim; ++i)
      for (std::uint32_t j = 0; j < dim; ++j)
        values(i, j) = read_raw<double>(in, path);
    mask.reserve(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
      char b;
      in.get(b);
      if (!in) throw ParseError("truncated mask in: " + path.string(), 0, 0);
      mask.push_back(b != 0);
    }
  }

  const int dim = static_cast<int>(values.rows());
  if (mask_path) {
    mask = load_mask_sidecar(*mask_path, dim);
  } else if (format == FileFormat::kCsv) {
    mask = mask_from_nan_pattern(values, path);
  }
  // Hidden slots may legitimately hold NaN when the file was written with
  // sentinels; normalize them to zero so the matrix stays numeric.
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      if (std::isnan(values(i, j))) {
        const bool hidden = !mask[static_cast<size_t>(i)] || !mask[static_cast<size_t>(j)];
        if (!hidden) {
          std::ostringstream msg;
          msg << path.string() << ": NaN at observed entry (" << i << "," << j << ")";
          throw InvalidMaskPattern(msg.str());
        }
        values(i, j) = 0.0;
      }
    }
  }

  SymmetricKernel kernel(std::move(values), std::move(mask));
  try {
    kernel.validate_observed_psd();
  } catch (const Error& e) {
    std::cerr << "warning: " << path.string() << ": " << e.what() << '\n';
  }
  return kernel;
}

KernelSet load_kernel_set(const std::vector<fs::path>& paths, FileFormat format,
                          const std::vector<fs::path>& mask_paths) {
  if (!mask_paths.empty() && mask_paths.size() != paths.size()) {
    throw DimensionMismatch("load_kernel_set: one mask path per kernel required");
  }
  KernelSet set;
  for (size_t i = 0; i < paths.size(); ++i) {
    std::optional<fs::path> mask;
    if (!mask_paths.empty()) mask = mask_paths[i];
    set.kernels.push_back(load_kernel(paths[i], format, mask));
  }
  set.validate();
  return set;
}

std::vector<int> load_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open labels file: " + path.string(), 0, 0);
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line == "1" || line == "+1") {
      labels.push_back(1);
    } else if (line == "-1") {
      labels.push_back(-1);
    } else {
      throw ParseError("labels must be +1 or -1: " + path.string(), line_no, 1);
    }
  }
  if (labels.empty()) throw ParseError("empty labels file: " + path.string(), 0, 0);
  return labels;
}

void save_labels(const std::vector<int>& labels, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write labels file: " + path.string());
  for (int y : labels) out << (y > 0 ? "1" : "-1") << '\n';
}

MaskSchedule make_mask_schedule(int dim, int num_kernels,
                                const std::vector<double>& ratios,
                                std::uint64_t seed) {
  if (ratios.empty()) throw Error("make_mask_schedule: no ratios given");
  for (size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0.0 && ratios[i] < 1.0)) {
      throw Error("make_mask_schedule: ratios must lie strictly in (0,1)");
    }
    if (i > 0 && !(ratios[i] > ratios[i - 1])) {
      throw Error("make_mask_schedule: ratios must be strictly increasing");
    }
  }

  // Every (object, kernel) slot once, shuffled; hidden(r) is a prefix.
  std::vector<std::pair<int, int>> slots;
  slots.reserve(static_cast<size_t>(dim) * static_cast<size_t>(num_kernels));
  for (int o = 0; o < dim; ++o)
    for (int k = 0; k < num_kernels; ++k) slots.emplace_back(o, k);
  Rng rng(seed);
  rng.shuffle(slots);

  MaskSchedule schedule;
  schedule.ratios = ratios;
  schedule.seed = seed;
  for (double r : ratios) {
    const size_t count =
        static_cast<size_t>(std::floor(r * dim * num_kernels));
    std::vector<std::vector<int>> per_kernel(static_cast<size_t>(num_kernels));
    for (size_t s = 0; s < count; ++s) {
      per_kernel[static_cast<size_t>(slots[s].second)].push_back(slots[s].first);
    }
    for (auto& v : per_kernel) std::sort(v.begin(), v.end());
    schedule.hidden.push_back(std::move(per_kernel));
  }
  return schedule;
}

KernelSet apply_masks(const KernelSet& truth,
                      const std::vector<std::vector<int>>& hidden_per_kernel) {
  if (hidden_per_kernel.size() != static_cast<size_t>(truth.num_kernels())) {
    throw DimensionMismatch("apply_masks: one hidden list per kernel required");
  }
  KernelSet out = truth;
  for (size_t k = 0; k < out.kernels.size(); ++k) {
    std::vector<bool> mask(static_cast<size_t>(truth.dim()), true);
    for (int o : hidden_per_kernel[k]) {
      if (o < 0 || o >= truth.dim()) {
        throw DimensionMismatch("apply_masks: hidden index out of range");
      }
      mask[static_cast<size_t>(o)] = false;
    }
    // Values are kept verbatim; only the visibility flags change.
    out.kernels[k] = SymmetricKernel(out.kernels[k].values(), std::move(mask));
  }
  return out;
}

std::pair<KernelSet, std::vector<int>> synth_kernel_set(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int l = spec.dim;
  const int d = spec.latent_dim;

  Matrix latent(l, d);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < d; ++j) latent(i, j) = spec.latent_mean + rng.normal();

  KernelSet set;
  for (int k = 0; k < spec.num_kernels; ++k) {
    Matrix view = latent;
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < d; ++j) view(i, j) += spec.noise_scale * rng.normal();
    set.kernels.emplace_back(symmetrize(view * view.transpose()));
  }

  Vector w(d);
  for (int j = 0; j < d; ++j) w(j) = rng.normal();
  const Vector proj = latent * w;
  std::vector<int> labels(static_cast<size_t>(l));
  for (int i = 0; i < l; ++i) labels[static_cast<size_t>(i)] = proj(i) >= 0.0 ? 1 : -1;
  return {std::move(set), std::move(labels)};
}

LabeledSplit make_split(int dim, int n_train, std::uint64_t seed,
                        const std::optional<LabeledSplit>& nested_with) {
  if (n_train < 1 || n_train >= dim) {
    throw Error("make_split: need 1 <= n_train < dim");
  }
  std::vector<char> in_train(static_cast<size_t>(dim), 0);
  std::vector<int> train;
  if (nested_with) {
    for (int i : nested_with->train_idx) {
      if (i < 0 || i >= dim) throw DimensionMismatch("make_split: nested index out of range");
      in_train[static_cast<size_t>(i)] = 1;
      train.push_back(i);
    }
    if (static_cast<int>(train.size()) > n_train) {
      throw Error("make_split: nested split is larger than n_train");
    }
  }
  std::vector<int> pool;
  for (int i = 0; i < dim; ++i) {
    if (!in_train[static_cast<size_t>(i)]) pool.push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(pool);
  for (size_t i = 0; train.size() < static_cast<size_t>(n_train); ++i) {
    in_train[static_cast<size_t>(pool[i])] = 1;
    train.push_back(pool[i]);
  }
  std::sort(train.begin(), train.end());

  LabeledSplit split;
  split.train_idx = std::move(train);
  for (int i = 0; i < dim; ++i) {
    if (!in_train[static_cast<size_t>(i)]) split.test_idx.push_back(i);
  }
  return split;
}

}  // namespace mkmc
