#include "itl/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace itl {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& y) {
  if (x.size() != y.size()) throw DimensionError("kernel_eval: length mismatch");
  if (spec.kind == KernelKind::Linear) return x.dot(y);
  spec.validate();
  return std::exp(-spec.bandwidth * (x - y).squaredNorm());
}

Matrix gram(const KernelSpec& spec, const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) throw DimensionError("gram: column count mismatch");
  if (spec.kind == KernelKind::Linear) return x * y.transpose();
  spec.validate();

  const RowMajor xr = x;
  const RowMajor yr = y;
  const auto p = x.cols();
  Matrix out(x.rows(), y.rows());
  for (Eigen::Index k = 0; k < yr.rows(); ++k) {
    const double* yk = yr.row(k).data();
    for (Eigen::Index i = 0; i < xr.rows(); ++i) {
      const double* xi = xr.row(i).data();
      double d2 = 0.0;
      for (Eigen::Index c = 0; c < p; ++c) {
        const double d = xi[c] - yk[c];
        d2 += d * d;
      }
      out(i, k) = std::exp(-spec.bandwidth * d2);
    }
  }
  return out;
}

double median_bandwidth(const Matrix& x) {
  const auto n = x.rows();
  if (n < 2) throw DataError("median_bandwidth: need at least two rows");
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      dists.push_back((x.row(i) - x.row(k)).norm());
    }
  }
  const auto m = dists.size();
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  double median = *mid;
  if (m % 2 == 0) {
    const double below = *std::max_element(dists.begin(), mid);
    median = 0.5 * (median + below);
  }
  if (!(median > 0.0)) {
    throw DataError("median_bandwidth: median pairwise distance is zero");
  }
  return 1.0 / (median * median);
}

}  // namespace itl
