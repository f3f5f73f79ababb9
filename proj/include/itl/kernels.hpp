#pragma once

#include "itl/core_model.hpp"

namespace itl {

// Linear: x'y. RBF: exp(-sigma * |x - y|^2).
double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& y);

// entries(i, k) = kernel_eval(spec, x.row(i), y.row(k)).
Matrix gram(const KernelSpec& spec, const Matrix& x, const Matrix& y);

// Median heuristic: 1 / median^2 over the n(n-1)/2 pairwise Euclidean
// distances. An even count takes the midpoint of the two central values.
double median_bandwidth(const Matrix& x);

}  // namespace itl
