#pragma once

#include <cmath>
#include <utility>

#include "kdc/types.hpp"

namespace kdc {

namespace detail {

// copy the upper triangle over the lower one
inline void mirror_upper(Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = j + 1; i < m.rows(); ++i) m(i, j) = m(j, i);
}

inline double pow_int(double base, int exponent) {
  double out = base;
  for (int k = 1; k < exponent; ++k) out *= base;
  return out;
}

}  // namespace detail

inline GramMatrix pairwise_sq_dist(const Matrix& x) {
  require_sample_matrix(x);
  const Index n = x.rows();
  Matrix d(n, n);
  for (Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j)
      d(i, j) = (x.row(i) - x.row(j)).squaredNorm();
  }
  detail::mirror_upper(d);
  return {std::move(d), GramKind::distance};
}

inline GramMatrix l2_distance_kernel(const Matrix& x) {
  GramMatrix d = pairwise_sq_dist(x);
  d.values = d.values.array().sqrt().matrix();
  return d;
}

// IBS similarity: k(i,j) = (2q)^-1 sum_r (2 - |z_ir - z_jr|).
inline GramMatrix ibs_kernel(const GenotypeMatrix& g) {
  const Matrix& z = g.values();
  const Index n = g.samples();
  const Index q = g.loci();
  const double denom = 2.0 * double(q);
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) {
      double acc = 0.0;
      for (Index r = 0; r < q; ++r) acc += 2.0 - std::abs(z(i, r) - z(j, r));
      k(i, j) = acc / denom;
    }
  detail::mirror_upper(k);
  return {std::move(k), GramKind::similarity};
}

inline GramMatrix gaussian_rbf_kernel(const Matrix& x, double rho) {
  if (!(rho > 0.0))
    throw InvalidParameter("rbf weight must be positive, got " +
                           detail::format_g(rho));
  GramMatrix d = pairwise_sq_dist(x);
  d.values = (-rho * d.values.array()).exp().matrix();
  d.kind = GramKind::similarity;
  return d;
}

// (<z_i, z_j> + c)^d; c=0,d=1 is the plain Gram matrix and c=1,d=2 the
// quadratic kernel.
inline GramMatrix polynomial_kernel(const Matrix& x, double shift, int degree) {
  if (degree < 1)
    throw InvalidParameter("polynomial degree must be >= 1, got " +
                           std::to_string(degree));
  if (shift < 0.0)
    throw InvalidParameter("polynomial shift must be >= 0, got " +
                           detail::format_g(shift));
  require_sample_matrix(x);
  const Index n = x.rows();
  Matrix g = x * x.transpose();
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j)
      k(i, j) = detail::pow_int(g(i, j) + shift, degree);
  detail::mirror_upper(k);
  return {std::move(k), GramKind::similarity};
}

// K -> H K H with H = I - 11'/n: subtract row means, then column means.
inline GramMatrix double_center(const GramMatrix& k) {
  require_gram(k);
  Matrix m = k.values;
  const Vector row_means = m.rowwise().mean();
  m.colwise() -= row_means;
  const Eigen::RowVectorXd col_means = m.colwise().mean();
  m.rowwise() -= col_means;
  detail::mirror_upper(m);
  return {std::move(m), GramKind::centered};
}

// Gower centering of a squared-distance matrix: -1/2 H D H. For D built from
// squared Euclidean distances of Y this reproduces the centered Gram matrix
// H Y Y' H.
inline GramMatrix gower_from_sq_dist(const GramMatrix& d) {
  require_gram(d, "squared-distance matrix");
  const Matrix& m = d.values;
  for (Index i = 0; i < m.rows(); ++i)
    if (m(i, i) != 0.0)
      throw InvalidInput("squared-distance matrix has nonzero diagonal at row " +
                         std::to_string(i + 1));
  if ((m.array() < 0.0).any())
    throw InvalidInput("squared-distance matrix has negative entries");
  GramMatrix out = double_center(d);
  out.values *= -0.5;
  return out;
}

inline GramMatrix build_kernel(const KernelSpec& spec, const Matrix& samples) {
  switch (spec.kind) {
    case KernelKind::linear: return polynomial_kernel(samples, 0.0, 1);
    case KernelKind::quadratic: return polynomial_kernel(samples, 1.0, 2);
    case KernelKind::poly: return polynomial_kernel(samples, spec.shift, spec.degree);
    case KernelKind::ibs: return ibs_kernel(GenotypeMatrix(samples));
    case KernelKind::l2: return l2_distance_kernel(samples);
    case KernelKind::rbf: return gaussian_rbf_kernel(samples, spec.rho);
    case KernelKind::gower: return gower_from_sq_dist(pairwise_sq_dist(samples));
  }
  throw InvalidParameter("unhandled kernel kind");
}

}  // namespace kdc
