#include "mkmc/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mkmc {

namespace {

// First non-positive pivot of an unpivoted Cholesky, for error reporting.
// Only runs on the failure path.
int failing_pivot(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  Matrix l = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) return j;
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return n - 1;
}

void check_square(const Matrix& a, const char* op) {
  if (a.rows() != a.cols()) {
    std::ostringstream msg;
    msg << op << ": expected square matrix, got " << a.rows() << "x"
        << a.cols();
    throw DimensionMismatch(msg.str());
  }
}

}  // namespace

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Partition::Partition(std::vector<int> visible, std::vector<int> hidden,
                     int dim)
    : visible_(std::move(visible)), hidden_(std::move(hidden)), dim_(dim) {
  auto strictly_increasing = [](const std::vector<int>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) ==
           v.end();
  };
  if (!strictly_increasing(visible_) || !strictly_increasing(hidden_)) {
    throw DimensionMismatch("Partition: index lists must be strictly increasing");
  }
  std::vector<char> seen(static_cast<size_t>(dim), 0);
  for (int i : visible_) {
    if (i < 0 || i >= dim || seen[static_cast<size_t>(i)]++)
      throw DimensionMismatch("Partition: invalid or duplicate visible index");
  }
  for (int i : hidden_) {
    if (i < 0 || i >= dim || seen[static_cast<size_t>(i)]++)
      throw DimensionMismatch("Partition: invalid or duplicate hidden index");
  }
  if (static_cast<int>(visible_.size() + hidden_.size()) != dim) {
    std::ostringstream msg;
    msg << "Partition: visible+hidden covers " << visible_.size() + hidden_.size()
        << " indices, expected " << dim;
    throw DimensionMismatch(msg.str());
  }
}

Partition Partition::from_mask(const std::vector<bool>& mask) {
  std::vector<int> visible;
  std::vector<int> hidden;
  for (int i = 0; i < static_cast<int>(mask.size()); ++i) {
    (mask[static_cast<size_t>(i)] ? visible : hidden).push_back(i);
  }
  return Partition(std::move(visible), std::move(hidden),
                   static_cast<int>(mask.size()));
}

SymmetricKernel::SymmetricKernel(Matrix values, std::vector<bool> mask,
                                 const Tolerances& tol)
    : values_(std::move(values)), mask_(std::move(mask)) {
  check_square(values_, "SymmetricKernel");
  if (values_.rows() != static_cast<Eigen::Index>(mask_.size())) {
    std::ostringstream msg;
    msg << "SymmetricKernel: mask has " << mask_.size() << " entries, matrix is "
        << values_.rows() << "x" << values_.cols();
    throw DimensionMismatch(msg.str());
  }
  const double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
  const double asym = (values_ - values_.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol.symmetry * scale) {
    std::ostringstream msg;
    msg << "SymmetricKernel: asymmetry " << asym << " exceeds tolerance "
        << tol.symmetry * scale;
    throw Error(msg.str());
  }
  values_ = symmetrize(values_);
}

SymmetricKernel::SymmetricKernel(Matrix values, const Tolerances& tol)
    : SymmetricKernel(std::move(values),
                      std::vector<bool>(static_cast<size_t>(values.rows()), true),
                      tol) {}

int SymmetricKernel::num_observed() const {
  return static_cast<int>(std::count(mask_.begin(), mask_.end(), true));
}

void SymmetricKernel::set_hidden_blocks(const Matrix& vh, const Matrix& hh) {
  const Partition p = partition();
  const auto& vis = p.visible();
  const auto& hid = p.hidden();
  if (vh.rows() != p.num_visible() || vh.cols() != p.num_hidden() ||
      hh.rows() != p.num_hidden() || hh.cols() != p.num_hidden()) {
    throw DimensionMismatch("set_hidden_blocks: block shape mismatch");
  }
  const Matrix hh_sym = symmetrize(hh);
  for (int a = 0; a < p.num_visible(); ++a) {
    for (int b = 0; b < p.num_hidden(); ++b) {
      values_(vis[static_cast<size_t>(a)], hid[static_cast<size_t>(b)]) = vh(a, b);
      values_(hid[static_cast<size_t>(b)], vis[static_cast<size_t>(a)]) = vh(a, b);
    }
  }
  for (int a = 0; a < p.num_hidden(); ++a) {
    for (int b = 0; b < p.num_hidden(); ++b) {
      values_(hid[static_cast<size_t>(a)], hid[static_cast<size_t>(b)]) =
          hh_sym(a, b);
    }
  }
}

void SymmetricKernel::validate_observed_psd(const Tolerances& tol) const {
  const Partition p = partition();
  if (p.num_visible() == 0) return;
  const Matrix vv = partition_view(values_, p).vv;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(vv, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = std::max(0.0, eig.eigenvalues().maxCoeff());
  if (lo < -tol.psd_slack * std::max(hi, 1e-300)) {
    std::ostringstream msg;
    msg << "observed block is not PSD: min eigenvalue " << lo
        << ", max eigenvalue " << hi;
    throw Error(msg.str());
  }
}

BlockView partition_view(const Matrix& values, const Partition& p) {
  if (values.rows() != p.dim() || values.cols() != p.dim()) {
    std::ostringstream msg;
    msg << "partition_view: partition covers " << p.dim()
        << " indices, matrix is " << values.rows() << "x" << values.cols();
    throw DimensionMismatch(msg.str());
  }
  const int n = p.num_visible();
  const int m = p.num_hidden();
  BlockView view;
  view.vv.resize(n, n);
  view.vh.resize(n, m);
  view.hh.resize(m, m);
  const auto& vis = p.visible();
  const auto& hid = p.hidden();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      view.vv(a, b) = values(vis[static_cast<size_t>(a)], vis[static_cast<size_t>(b)]);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < m; ++b)
      view.vh(a, b) = values(vis[static_cast<size_t>(a)], hid[static_cast<size_t>(b)]);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      view.hh(a, b) = values(hid[static_cast<size_t>(a)], hid[static_cast<size_t>(b)]);
  return view;
}

BlockView partition_view(const SymmetricKernel& kernel, const Partition& p) {
  return partition_view(kernel.values(), p);
}

Matrix assemble(const BlockView& view, const Partition& p) {
  Matrix out(p.dim(), p.dim());
  const auto& vis = p.visible();
  const auto& hid = p.hidden();
  for (int a = 0; a < p.num_visible(); ++a)
    for (int b = 0; b < p.num_visible(); ++b)
      out(vis[static_cast<size_t>(a)], vis[static_cast<size_t>(b)]) = view.vv(a, b);
  for (int a = 0; a < p.num_visible(); ++a)
    for (int b = 0; b < p.num_hidden(); ++b) {
      out(vis[static_cast<size_t>(a)], hid[static_cast<size_t>(b)]) = view.vh(a, b);
      out(hid[static_cast<size_t>(b)], vis[static_cast<size_t>(a)]) = view.vh(a, b);
    }
  for (int a = 0; a < p.num_hidden(); ++a)
    for (int b = 0; b < p.num_hidden(); ++b)
      out(hid[static_cast<size_t>(a)], hid[static_cast<size_t>(b)]) = view.hh(a, b);
  return out;
}

Matrix CholeskyFactor::solve(const Matrix& rhs) const {
  Matrix x = lower.triangularView<Eigen::Lower>().solve(rhs);
  return lower.transpose().triangularView<Eigen::Upper>().solve(x);
}

CholeskyFactor cholesky_logdet(const Matrix& a, const Tolerances& tol) {
  check_square(a, "cholesky_logdet");
  const int n = static_cast<int>(a.rows());
  CholeskyFactor result;
  if (n == 0) {
    result.lower.resize(0, 0);
    return result;
  }
  const double base = tol.jitter_scale * a.trace() / n;
  double jitter = 0.0;
  for (int attempt = 0; attempt <= tol.jitter_max_doublings; ++attempt) {
    Matrix work = a;
    if (jitter > 0.0) work.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(work);
    if (llt.info() == Eigen::Success) {
      result.lower = llt.matrixL();
      // Guard against quiet NaN propagation on pathological input.
      if (result.lower.diagonal().minCoeff() > 0.0 &&
          result.lower.allFinite()) {
        result.logdet = 2.0 * result.lower.diagonal().array().log().sum();
        result.jitter = jitter;
        return result;
      }
    }
    jitter = (jitter == 0.0) ? std::max(base, 1e-300) : 2.0 * jitter;
  }
  std::ostringstream msg;
  msg << "matrix of dim " << n << " not positive definite after jitter budget";
  throw NotPositiveDefinite(msg.str(), failing_pivot(a));
}

Matrix schur_complement(const BlockView& view, const Tolerances& tol) {
  if (view.hh.rows() == 0) return view.hh;
  if (view.vv.rows() == 0) return view.hh;
  const Matrix w = solve_spd(view.vv, view.vh, tol);
  return symmetrize(view.hh - view.vh.transpose() * w);
}

Matrix solve_spd(const Matrix& a, const Matrix& rhs, const Tolerances& tol) {
  if (a.rows() != rhs.rows()) {
    std::ostringstream msg;
    msg << "solve_spd: matrix dim " << a.rows() << " vs rhs rows " << rhs.rows();
    throw DimensionMismatch(msg.str());
  }
  return cholesky_logdet(a, tol).solve(rhs);
}

}  // namespace mkmc
