// Command-line driver: synthetic data generation, nested masking,
// completion (MKMC or imputation baselines), evaluation, and the full
// benchmark sweep. Exit codes: 0 success, 1 usage/validation error,
// 2 numerical failure (non-convergence, factorization failure).

#include <malloc.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mkmc/baselines.hpp"
#include "mkmc/dataset.hpp"
#include "mkmc/em.hpp"
#include "mkmc/evalsuite.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool g_json_errors = false;

void report_error(const std::string& kind, const std::string& message) {
  if (g_json_errors) {
    json err;
    err["error"] = kind;
    err["message"] = message;
    std::cerr << err.dump() << '\n';
  } else {
    std::cerr << "error: " << message << '\n';
  }
}

// Flag-derived configs are validated by the library; surface those
// failures as usage errors rather than numerical ones.
template <typename T>
void validate_flags(const T& cfg) {
  try {
    cfg.validate();
  } catch (const mkmc::Error& e) {
    throw UsageError(e.what());
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string kernel_ext(mkmc::FileFormat format) {
  return format == mkmc::FileFormat::kCsv ? ".csv" : ".bin";
}

mkmc::FileFormat parse_format(const std::string& name) {
  if (name == "csv") return mkmc::FileFormat::kCsv;
  if (name == "bin" || name == "binary") return mkmc::FileFormat::kBinary;
  throw UsageError("unknown format '" + name + "' (expected csv or bin)");
}

std::vector<fs::path> find_kernel_files(const fs::path& dir,
                                        mkmc::FileFormat format) {
  std::vector<fs::path> paths;
  for (int k = 1;; ++k) {
    const fs::path p = dir / ("kernel_" + std::to_string(k) + kernel_ext(format));
    if (!fs::exists(p)) break;
    paths.push_back(p);
  }
  if (paths.empty()) {
    throw UsageError("no kernel_1" + kernel_ext(format) + ", kernel_2" +
                     kernel_ext(format) + ", ... files found in " +
                     dir.string());
  }
  return paths;
}

mkmc::KernelSet load_set_with_optional_masks(const fs::path& dir,
                                             mkmc::FileFormat format) {
  const std::vector<fs::path> paths = find_kernel_files(dir, format);
  std::vector<fs::path> masks;
  bool any_mask = false;
  for (size_t k = 0; k < paths.size(); ++k) {
    fs::path m = paths[k];
    m.replace_extension(".mask");
    if (fs::exists(m)) any_mask = true;
    masks.push_back(m);
  }
  if (!any_mask) return mkmc::load_kernel_set(paths, format);
  for (const auto& m : masks) {
    if (!fs::exists(m)) {
      throw UsageError("mask sidecars must cover every kernel; missing " +
                       m.string());
    }
  }
  return mkmc::load_kernel_set(paths, format, masks);
}

std::vector<double> parse_ratios(const std::string& csv) {
  std::vector<double> ratios;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      size_t used = 0;
      ratios.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("cannot parse ratio '" + tok + "'");
    }
  }
  if (ratios.empty()) throw UsageError("empty ratio list");
  return ratios;
}

std::string ratio_dir_name(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ratio_%02d", static_cast<int>(std::lround(r * 100.0)));
  return buf;
}

void write_trace(const mkmc::CompletionTrace& trace, int num_kernels,
                 const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw mkmc::Error("cannot write " + path.string());
  out << "iter,J_total,J_prior";
  for (int k = 1; k <= num_kernels; ++k) out << ",kl_" << k;
  out << ",max_block_delta\n";
  for (const auto& entry : trace.iterations) {
    out << entry.iter << ',' << format_double(entry.objective.total) << ','
        << format_double(entry.objective.prior_kl);
    for (double kl : entry.objective.per_matrix_kl) {
      out << ',' << format_double(kl);
    }
    out << ',' << format_double(entry.max_block_delta) << '\n';
  }
}

void write_model(const mkmc::Matrix& m, const fs::path& dir,
                 mkmc::FileFormat format) {
  mkmc::save_kernel(mkmc::SymmetricKernel(mkmc::symmetrize(m)),
                    dir / ("model" + kernel_ext(format)), format);
}

// ---- synth ----

struct SynthArgs {
  mkmc::SyntheticSpec spec;
  std::string out_dir;
  std::string format = "csv";
};

int cmd_synth(const SynthArgs& args) {
  validate_flags(args.spec);
  const mkmc::FileFormat format = parse_format(args.format);
  const fs::path out(args.out_dir);
  fs::create_directories(out);

  auto [set, labels] = mkmc::synth_kernel_set(args.spec);
  for (int k = 0; k < set.num_kernels(); ++k) {
    mkmc::save_kernel(set.kernels[static_cast<size_t>(k)],
                      out / ("kernel_" + std::to_string(k + 1) + kernel_ext(format)),
                      format);
  }
  mkmc::save_labels(labels, out / "labels.csv");

  json manifest;
  manifest["l"] = args.spec.dim;
  manifest["k"] = args.spec.num_kernels;
  manifest["d"] = args.spec.latent_dim;
  manifest["sigma"] = args.spec.noise_scale;
  manifest["latent_mean"] = args.spec.latent_mean;
  manifest["seed"] = args.spec.seed;
  manifest["format"] = args.format;
  std::ofstream mf(out / "manifest.json");
  mf << manifest.dump(2) << '\n';
  std::cout << manifest.dump(2) << '\n';
  return kExitOk;
}

// ---- mask ----

struct MaskArgs {
  std::string in_dir;
  std::string out_dir;
  std::string ratios = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string check_dir;
};

int check_schedule(const fs::path& dir) {
  // Collect ratio_* directories in ascending ratio order and verify that
  // each kernel's hidden set grows monotonically.
  std::vector<fs::path> ratio_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() &&
        entry.path().filename().string().rfind("ratio_", 0) == 0) {
      ratio_dirs.push_back(entry.path());
    }
  }
  if (ratio_dirs.empty()) {
    throw UsageError("no ratio_* directories under " + dir.string());
  }
  std::sort(ratio_dirs.begin(), ratio_dirs.end());

  auto load_masks = [](const fs::path& rd) {
    std::vector<std::vector<bool>> masks;
    for (int k = 1;; ++k) {
      const fs::path p = rd / ("kernel_" + std::to_string(k) + ".mask");
      if (!fs::exists(p)) break;
      std::ifstream in(p);
      std::vector<bool> mask;
      std::string line;
      while (std::getline(in, line)) {
        if (line == "1") mask.push_back(true);
        else if (line == "0") mask.push_back(false);
        else if (!line.empty()) throw UsageError("bad mask entry in " + p.string());
      }
      masks.push_back(std::move(mask));
    }
    if (masks.empty()) throw UsageError("no kernel_*.mask in " + rd.string());
    return masks;
  };

  std::vector<std::vector<bool>> prev;
  for (const auto& rd : ratio_dirs) {
    const auto cur = load_masks(rd);
    if (!prev.empty()) {
      if (cur.size() != prev.size()) {
        report_error("schedule", "kernel counts differ between ratio levels");
        return kExitNumerical;
      }
      for (size_t k = 0; k < cur.size(); ++k) {
        if (cur[k].size() != prev[k].size()) {
          report_error("schedule", "mask lengths differ between ratio levels");
          return kExitNumerical;
        }
        for (size_t o = 0; o < cur[k].size(); ++o) {
          // Nested: once hidden, always hidden at higher ratios.
          if (!prev[k][o] && cur[k][o]) {
            std::ostringstream msg;
            msg << "schedule not nested: kernel " << k + 1 << ", object " << o
                << " is hidden at a lower ratio but observed in "
                << rd.filename().string();
            report_error("schedule", msg.str());
            return kExitNumerical;
          }
        }
      }
    }
    prev = cur;
  }
  std::cout << "schedule is nested (" << ratio_dirs.size() << " ratio levels)\n";
  return kExitOk;
}

int cmd_mask(const MaskArgs& args) {
  if (!args.check_dir.empty()) return check_schedule(args.check_dir);
  if (args.in_dir.empty() || args.out_dir.empty()) {
    throw UsageError("mask requires --in and --out (or --check DIR)");
  }
  const mkmc::FileFormat format = parse_format(args.format);
  const std::vector<double> ratios = parse_ratios(args.ratios);
  const std::vector<fs::path> kernel_paths = find_kernel_files(args.in_dir, format);
  const mkmc::KernelSet set = mkmc::load_kernel_set(kernel_paths, format);

  const mkmc::MaskSchedule schedule = mkmc::make_mask_schedule(
      set.dim(), set.num_kernels(), ratios, args.seed);

  const fs::path out(args.out_dir);
  for (size_t r = 0; r < ratios.size(); ++r) {
    const fs::path rd = out / ratio_dir_name(ratios[r]);
    fs::create_directories(rd);
    for (int k = 0; k < set.num_kernels(); ++k) {
      std::vector<bool> mask(static_cast<size_t>(set.dim()), true);
      for (int o : schedule.hidden[r][static_cast<size_t>(k)]) {
        mask[static_cast<size_t>(o)] = false;
      }
      std::ofstream mout(rd / ("kernel_" + std::to_string(k + 1) + ".mask"));
      for (bool m : mask) mout << (m ? '1' : '0') << '\n';
    }
  }

  json manifest;
  manifest["ratios"] = ratios;
  manifest["seed"] = args.seed;
  manifest["dim"] = set.dim();
  manifest["kernels"] = set.num_kernels();
  std::ofstream mf(out / "schedule.json");
  mf << manifest.dump(2) << '\n';
  std::cout << manifest.dump(2) << '\n';
  return kExitOk;
}

// ---- complete ----

struct CompleteArgs {
  std::string in_dir;
  std::string out_dir;
  std::string mask_dir;
  std::string method = "mkmc";
  std::string format = "csv";
  mkmc::MkmcConfig cfg;
};

int cmd_complete(const CompleteArgs& args) {
  if (args.method != "mkmc" && args.method != "zero" && args.method != "mean") {
    throw UsageError("unknown method '" + args.method + "'");
  }
  validate_flags(args.cfg);
  const mkmc::FileFormat format = parse_format(args.format);

  mkmc::KernelSet set;
  if (!args.mask_dir.empty()) {
    const std::vector<fs::path> kernel_paths =
        find_kernel_files(args.in_dir, format);
    std::vector<fs::path> masks;
    for (size_t k = 0; k < kernel_paths.size(); ++k) {
      masks.push_back(fs::path(args.mask_dir) /
                      ("kernel_" + std::to_string(k + 1) + ".mask"));
    }
    set = mkmc::load_kernel_set(kernel_paths, format, masks);
  } else {
    set = load_set_with_optional_masks(args.in_dir, format);
  }
  set.lambda = args.cfg.lambda;

  const fs::path out(args.out_dir);
  fs::create_directories(out);

  mkmc::KernelSet done;
  mkmc::CompletionTrace trace;
  if (args.method == "mkmc") {
    std::tie(done, trace) = mkmc::run(set, args.cfg);
  } else {
    done = set;
    for (auto& kernel : done.kernels) {
      kernel = (args.method == "zero") ? mkmc::zero_impute(kernel)
                                       : mkmc::mean_impute(kernel);
    }
    done.model = mkmc::combine_model(done);
    mkmc::ObjectiveValue j =
        mkmc::objective(done, *done.model, args.cfg.lambda, args.cfg.tols);
    trace.iterations.push_back({0, std::move(j), 0.0});
    trace.converged = true;
    trace.stop_reason = mkmc::StopReason::kTolerance;
  }

  for (int k = 0; k < done.num_kernels(); ++k) {
    // Completed kernels are fully populated; persist them as observed.
    mkmc::save_kernel(
        mkmc::SymmetricKernel(done.kernels[static_cast<size_t>(k)].values()),
        out / ("kernel_" + std::to_string(k + 1) + kernel_ext(format)), format);
  }
  write_model(*done.model, out, format);
  write_trace(trace, done.num_kernels(), out / "trace.csv");

  if (!trace.converged) {
    report_error("non_convergence",
                 "completion did not reach tol within max-iters; "
                 "partial results and trace written to " + out.string());
    return kExitNumerical;
  }
  std::cout << "method=" << args.method
            << " iterations=" << trace.iterations.back().iter
            << " J=" << format_double(trace.iterations.back().objective.total)
            << '\n';
  return kExitOk;
}

// ---- eval ----

struct EvalArgs {
  std::string truth_dir;
  std::string est_dir;
  std::string labels_path;
  std::string out_path = "report.csv";
  std::string format = "csv";
  int train_size = 200;
  double c = 1.0;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalArgs& args) {
  const mkmc::FileFormat format = parse_format(args.format);
  const mkmc::KernelSet truth =
      mkmc::load_kernel_set(find_kernel_files(args.truth_dir, format), format);
  const mkmc::KernelSet est =
      mkmc::load_kernel_set(find_kernel_files(args.est_dir, format), format);
  if (truth.num_kernels() != est.num_kernels() || truth.dim() != est.dim()) {
    throw UsageError("truth and estimate kernel sets do not match in shape");
  }
  const std::vector<int> labels = mkmc::load_labels(args.labels_path);
  if (static_cast<int>(labels.size()) != truth.dim()) {
    throw UsageError("labels cover " + std::to_string(labels.size()) +
                     " objects, kernels have " + std::to_string(truth.dim()));
  }
  const fs::path model_path =
      fs::path(args.est_dir) / ("model" + kernel_ext(format));
  if (!fs::exists(model_path)) {
    throw UsageError("estimate directory has no model" + kernel_ext(format));
  }
  const mkmc::Matrix model = mkmc::load_kernel(model_path, format).values();

  mkmc::LabeledSplit split =
      mkmc::make_split(truth.dim(), args.train_size, args.seed);
  split.labels = labels;
  split.validate(truth.dim());

  mkmc::EvalReport report;
  report.mean_corr_distance = mkmc::corr_matrix_distance(truth, est);
  for (int k = 0; k < est.num_kernels(); ++k) {
    const mkmc::Matrix& kk = est.kernels[static_cast<size_t>(k)].values();
    const mkmc::SvmModel svm = mkmc::svm_train(kk, split, args.c);
    const std::vector<double> scores =
        mkmc::svm_decision(svm, kk, split.test_idx);
    std::vector<int> test_labels;
    for (int i : split.test_idx) test_labels.push_back(labels[static_cast<size_t>(i)]);
    report.roc_per_matrix.push_back(mkmc::roc_score(scores, test_labels));
  }
  {
    const mkmc::SvmModel svm = mkmc::svm_train(model, split, args.c);
    const std::vector<double> scores =
        mkmc::svm_decision(svm, model, split.test_idx);
    std::vector<int> test_labels;
    for (int i : split.test_idx) test_labels.push_back(labels[static_cast<size_t>(i)]);
    report.roc_model = mkmc::roc_score(scores, test_labels);
  }

  std::ofstream out(args.out_path);
  if (!out) throw mkmc::Error("cannot write " + args.out_path);
  out << "metric,value\n";
  out << "corr_distance," << format_double(report.mean_corr_distance) << '\n';
  for (size_t k = 0; k < report.roc_per_matrix.size(); ++k) {
    out << "roc_q" << k + 1 << ',' << format_double(report.roc_per_matrix[k])
        << '\n';
  }
  out << "roc_model," << format_double(report.roc_model) << '\n';
  std::cout << "corr_distance=" << format_double(report.mean_corr_distance)
            << " roc_model=" << format_double(report.roc_model) << '\n';
  return kExitOk;
}

// ---- bench ----

struct BenchArgs {
  mkmc::SyntheticSpec spec;
  std::string ratios = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  std::string methods = "mkmc,zero,mean";
  int num_seeds = 5;
  int train_size = 100;
  double c = 1.0;
  std::string out_path = "sweep.csv";
  mkmc::MkmcConfig cfg;
};

int cmd_bench(const BenchArgs& args) {
  validate_flags(args.spec);
  validate_flags(args.cfg);
  if (args.num_seeds < 1) throw UsageError("--seeds must be >= 1");
  const std::vector<double> ratios = parse_ratios(args.ratios);
  std::vector<std::string> methods;
  {
    std::stringstream ss(args.methods);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      if (tok != "mkmc" && tok != "zero" && tok != "mean") {
        throw UsageError("unknown method '" + tok + "'");
      }
      methods.push_back(tok);
    }
  }
  if (methods.empty()) throw UsageError("empty method list");
  if (args.train_size >= args.spec.dim) {
    throw UsageError("--train-size must be smaller than --l");
  }

  std::ofstream out(args.out_path);
  if (!out) throw mkmc::Error("cannot write " + args.out_path);
  out << "method,ratio,seed,distance,roc_model\n";

  for (int s = 0; s < args.num_seeds; ++s) {
    mkmc::SyntheticSpec spec = args.spec;
    spec.seed = args.spec.seed + static_cast<std::uint64_t>(s);
    auto [truth, labels] = mkmc::synth_kernel_set(spec);
    truth.lambda = args.cfg.lambda;
    const mkmc::MaskSchedule schedule = mkmc::make_mask_schedule(
        spec.dim, spec.num_kernels, ratios, spec.seed);
    mkmc::LabeledSplit split =
        mkmc::make_split(spec.dim, args.train_size, spec.seed);
    split.labels = labels;

    for (size_t r = 0; r < ratios.size(); ++r) {
      const mkmc::KernelSet masked = mkmc::apply_masks(truth, schedule.hidden[r]);
      for (const std::string& method : methods) {
        mkmc::KernelSet done;
        if (method == "mkmc") {
          done = mkmc::run(masked, args.cfg).first;
        } else {
          done = masked;
          for (auto& kernel : done.kernels) {
            kernel = (method == "zero") ? mkmc::zero_impute(kernel)
                                        : mkmc::mean_impute(kernel);
          }
          done.model = mkmc::combine_model(done);
        }
        const double distance = mkmc::corr_matrix_distance(truth, done);
        const mkmc::SvmModel svm = mkmc::svm_train(*done.model, split, args.c);
        const std::vector<double> scores =
            mkmc::svm_decision(svm, *done.model, split.test_idx);
        std::vector<int> test_labels;
        for (int i : split.test_idx) {
          test_labels.push_back(labels[static_cast<size_t>(i)]);
        }
        const double roc = mkmc::roc_score(scores, test_labels);
        out << method << ',' << format_double(ratios[r]) << ',' << spec.seed
            << ',' << format_double(distance) << ',' << format_double(roc)
            << '\n';
      }
    }
  }
  std::cout << "wrote " << args.out_path << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef M_MMAP_THRESHOLD
  // The solver allocates many short-lived matrices above glibc's default
  // mmap threshold; keeping them on the heap avoids per-temporary
  // mmap/munmap and page-zeroing costs.
  mallopt(M_MMAP_THRESHOLD, 64 * 1024 * 1024);
#endif
#ifdef M_TRIM_THRESHOLD
  // Likewise stop glibc from trimming the heap between those bursts,
  // which would re-fault the pages on the next iteration.
  mallopt(M_TRIM_THRESHOLD, 64 * 1024 * 1024);
#endif
#ifdef M_TOP_PAD
  mallopt(M_TOP_PAD, 64 * 1024 * 1024);
#endif
  CLI::App app{"Mutual completion of incomplete kernel matrices"};
  app.require_subcommand(1);
  app.add_flag("--json", g_json_errors, "machine-parseable JSON errors on stderr");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic kernel set");
  synth_cmd->add_option("--l", synth.spec.dim, "number of objects");
  synth_cmd->add_option("--k", synth.spec.num_kernels, "number of kernels");
  synth_cmd->add_option("--d", synth.spec.latent_dim, "latent dimension");
  synth_cmd->add_option("--sigma", synth.spec.noise_scale, "per-view noise scale");
  synth_cmd->add_option("--latent-mean", synth.spec.latent_mean,
                        "mean of the latent features");
  synth_cmd->add_option("--seed", synth.spec.seed, "RNG seed");
  synth_cmd->add_option("--format", synth.format, "csv or bin");
  synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();

  MaskArgs mask;
  auto* mask_cmd = app.add_subcommand("mask", "draw a nested masking schedule");
  mask_cmd->add_option("--in", mask.in_dir, "directory with kernel files");
  mask_cmd->add_option("--out", mask.out_dir, "schedule output directory");
  mask_cmd->add_option("--ratios", mask.ratios, "comma-separated missing ratios");
  mask_cmd->add_option("--seed", mask.seed, "RNG seed");
  mask_cmd->add_option("--format", mask.format, "csv or bin");
  mask_cmd->add_option("--check", mask.check_dir,
                       "verify nestedness of an emitted schedule");

  CompleteArgs complete;
  auto* complete_cmd = app.add_subcommand("complete", "complete a kernel set");
  complete_cmd->add_option("--in", complete.in_dir, "input directory")->required();
  complete_cmd->add_option("--out", complete.out_dir, "output directory")->required();
  complete_cmd->add_option("--masks", complete.mask_dir,
                           "directory with kernel_*.mask sidecars");
  complete_cmd->add_option("--method", complete.method, "mkmc, zero or mean");
  complete_cmd->add_option("--format", complete.format, "csv or bin");
  complete_cmd->add_option("--lambda", complete.cfg.lambda, "regularization weight");
  complete_cmd->add_option("--tol", complete.cfg.tol, "relative J tolerance");
  complete_cmd->add_option("--max-iters", complete.cfg.max_iters, "iteration cap");
  complete_cmd->add_option("--threads", complete.cfg.threads, "E-step fan-out");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "score an estimate against truth");
  eval_cmd->add_option("--truth", eval.truth_dir, "truth directory")->required();
  eval_cmd->add_option("--est", eval.est_dir, "estimate directory")->required();
  eval_cmd->add_option("--labels", eval.labels_path, "labels file")->required();
  eval_cmd->add_option("--out", eval.out_path, "report path");
  eval_cmd->add_option("--format", eval.format, "csv or bin");
  eval_cmd->add_option("--train-size", eval.train_size, "SVM training set size");
  eval_cmd->add_option("--c", eval.c, "SVM regularization C");
  eval_cmd->add_option("--seed", eval.seed, "split seed");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "full method x ratio x seed sweep");
  bench_cmd->add_option("--l", bench.spec.dim, "number of objects");
  bench_cmd->add_option("--k", bench.spec.num_kernels, "number of kernels");
  bench_cmd->add_option("--d", bench.spec.latent_dim, "latent dimension");
  bench_cmd->add_option("--sigma", bench.spec.noise_scale, "per-view noise scale");
  bench_cmd->add_option("--latent-mean", bench.spec.latent_mean,
                        "mean of the latent features");
  bench_cmd->add_option("--seed", bench.spec.seed, "base RNG seed");
  bench_cmd->add_option("--seeds", bench.num_seeds, "number of seeds");
  bench_cmd->add_option("--ratios", bench.ratios, "comma-separated missing ratios");
  bench_cmd->add_option("--methods", bench.methods, "comma-separated method list");
  bench_cmd->add_option("--train-size", bench.train_size, "SVM training set size");
  bench_cmd->add_option("--c", bench.c, "SVM regularization C");
  bench_cmd->add_option("--out", bench.out_path, "sweep CSV path");
  bench_cmd->add_option("--lambda", bench.cfg.lambda, "regularization weight");
  bench_cmd->add_option("--tol", bench.cfg.tol, "relative J tolerance");
  bench_cmd->add_option("--max-iters", bench.cfg.max_iters, "iteration cap");
  bench_cmd->add_option("--threads", bench.cfg.threads, "E-step fan-out");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (mask_cmd->parsed()) return cmd_mask(mask);
    if (complete_cmd->parsed()) return cmd_complete(complete);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (bench_cmd->parsed()) return cmd_bench(bench);
  } catch (const UsageError& e) {
    report_error("usage", e.what());
    return kExitUsage;
  } catch (const mkmc::OneClassOnly& e) {
    report_error("one_class_only", e.what());
    return kExitUsage;
  } catch (const mkmc::ParseError& e) {
    report_error("parse", e.what());
    return kExitUsage;
  } catch (const mkmc::DimensionMismatch& e) {
    report_error("dimension_mismatch", e.what());
    return kExitUsage;
  } catch (const mkmc::Error& e) {
    report_error("numerical", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return kExitNumerical;
  }
  return kExitUsage;
}
