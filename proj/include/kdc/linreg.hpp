#pragma once

#include <utility>

#include "kdc/kernels.hpp"
#include "kdc/types.hpp"

namespace kdc {

struct FittedAdjustment {
  Matrix beta;       // (intercept + m) x p, intercept row first when present
  Matrix residuals;  // n x p
};

namespace detail {

inline Matrix augmented_design(const CovariateMatrix& x, Index n) {
  const Index m = x.values.cols();
  const Index cols = m + (x.with_intercept ? 1 : 0);
  if (cols == 0)
    throw InvalidInput("covariate matrix has no columns and no intercept");
  Matrix design(n, cols);
  if (x.with_intercept) design.col(0).setOnes();
  if (m > 0) design.rightCols(m) = x.values;
  return design;
}

}  // namespace detail

// Least-squares adjustment of Y for X (intercept prepended by default).
// Rank loss in the design is a hard error.
inline FittedAdjustment residualize(const Matrix& y, const CovariateMatrix& x) {
  require_sample_matrix(y, "phenotype matrix");
  const Index n = y.rows();
  if (x.values.cols() > 0) {
    if (x.values.rows() != n)
      throw InvalidInput("covariate rows (" + std::to_string(x.values.rows()) +
                         ") do not match phenotype rows (" + std::to_string(n) +
                         ")");
    if (!x.values.allFinite())
      throw InvalidInput("covariate matrix has non-finite entries");
  }
  const Matrix design = detail::augmented_design(x, n);
  if (n <= design.cols())
    throw RankDeficient("need more samples than design columns (" +
                        std::to_string(n) + " samples, " +
                        std::to_string(design.cols()) + " columns)");
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < design.cols())
    throw RankDeficient("covariate design matrix is rank deficient (rank " +
                        std::to_string(qr.rank()) + " of " +
                        std::to_string(design.cols()) + ")");
  FittedAdjustment fit;
  fit.beta = qr.solve(y);
  fit.residuals = y - design * fit.beta;
  return fit;
}

// Projection onto the column space of z: Q1 Q1' from a thin QR.
inline GramMatrix hat_matrix(const Matrix& z) {
  require_sample_matrix(z, "predictor matrix");
  const Index n = z.rows();
  const Index q = z.cols();
  if (n <= q)
    throw RankDeficient("need more samples than predictor columns");
  Eigen::ColPivHouseholderQR<Matrix> qr(z);
  if (qr.rank() < q)
    throw RankDeficient("predictor matrix is rank deficient (rank " +
                        std::to_string(qr.rank()) + " of " + std::to_string(q) +
                        ")");
  Matrix thin_q = Matrix::Identity(n, q);
  thin_q.applyOnTheLeft(qr.householderQ());
  Matrix h = thin_q * thin_q.transpose();
  detail::mirror_upper(h);
  return {std::move(h), GramKind::similarity};
}

// MANOVA-style pseudo-F of Y on the columns of z:
//   [tr(H Y Y' H)/(q-1)] / [tr((I-H) Y Y' (I-H))/(n-q)].
inline double pseudo_f(const Matrix& y, const Matrix& z) {
  require_sample_matrix(y, "phenotype matrix");
  const Index n = y.rows();
  if (z.rows() != n)
    throw InvalidInput("predictor rows do not match phenotype rows");
  const Index q = z.cols();
  if (q < 2)
    throw InvalidParameter("pseudo-F needs at least 2 predictor columns");
  const GramMatrix h = hat_matrix(z);
  const Matrix fitted = h.values * y;
  const Matrix resid = y - fitted;
  const double num = fitted.squaredNorm() / double(q - 1);
  const double den = resid.squaredNorm() / double(n - q);
  if (den == 0.0)
    throw DegenerateFit("zero residual trace; pseudo-F is not finite");
  return num / den;
}

// Same ratio with Y Y' replaced by an arbitrary similarity/distance matrix.
inline double pseudo_f_distance(const GramMatrix& d, const Matrix& z) {
  require_gram(d);
  const Index n = d.n();
  if (z.rows() != n)
    throw InvalidInput("predictor rows do not match matrix size");
  const Index q = z.cols();
  if (q < 2)
    throw InvalidParameter("pseudo-F needs at least 2 predictor columns");
  const GramMatrix h = hat_matrix(z);
  const Matrix hdh = h.values * d.values * h.values;
  const Matrix rest = Matrix::Identity(n, n) - h.values;
  const Matrix rdr = rest * d.values * rest;
  const double num = hdh.trace() / double(q - 1);
  const double den = rdr.trace() / double(n - q);
  if (den == 0.0)
    throw DegenerateFit("zero residual trace; pseudo-F is not finite");
  return num / den;
}

}  // namespace kdc
