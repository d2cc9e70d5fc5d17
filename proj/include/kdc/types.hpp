#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>

#include "kdc/errors.hpp"

namespace kdc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class GramKind { similarity, distance, centered };

// n x n pairwise matrix. Constructors mirror one triangle so `values` is
// exactly symmetric.
struct GramMatrix {
  Matrix values;
  GramKind kind = GramKind::similarity;

  Index n() const { return values.rows(); }
};

inline void require_sample_matrix(const Matrix& x, const char* what = "sample matrix") {
  if (x.rows() < 2)
    throw InvalidInput(std::string(what) + " needs at least 2 rows, got " +
                       std::to_string(x.rows()));
  if (x.cols() < 1)
    throw InvalidInput(std::string(what) + " needs at least 1 column");
  if (!x.allFinite())
    throw InvalidInput(std::string(what) + " has non-finite entries");
}

inline void require_gram(const GramMatrix& g, const char* what = "gram matrix") {
  const Matrix& m = g.values;
  if (m.rows() != m.cols())
    throw InvalidInput(std::string(what) + " is not square");
  if (m.rows() < 2)
    throw InvalidInput(std::string(what) + " needs at least 2 samples");
  if (!m.allFinite())
    throw InvalidInput(std::string(what) + " has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = j + 1; i < m.rows(); ++i)
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale)
        throw InvalidInput(std::string(what) + " is not symmetric");
}

// Genotype minor-allele counts; every entry must be 0, 1 or 2.
class GenotypeMatrix {
 public:
  explicit GenotypeMatrix(Matrix counts) : values_(std::move(counts)) {
    if (values_.rows() < 2)
      throw InvalidInput("genotype matrix needs at least 2 samples");
    if (values_.cols() < 1)
      throw InvalidInput("genotype matrix needs at least 1 locus");
    for (Index j = 0; j < values_.cols(); ++j)
      for (Index i = 0; i < values_.rows(); ++i) {
        const double v = values_(i, j);
        if (v != 0.0 && v != 1.0 && v != 2.0)
          throw InvalidInput("genotype entry at row " + std::to_string(i + 1) +
                             ", column " + std::to_string(j + 1) +
                             " must be 0, 1 or 2");
      }
  }

  const Matrix& values() const { return values_; }
  Index samples() const { return values_.rows(); }
  Index loci() const { return values_.cols(); }

 private:
  Matrix values_;
};

// Covariates X; the fit prepends an intercept column when with_intercept is
// set. values may have zero columns (intercept-only adjustment).
struct CovariateMatrix {
  Matrix values;
  bool with_intercept = true;
};

enum class KernelKind { linear, quadratic, ibs, l2, rbf, poly, gower };

namespace detail {

inline std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline double parse_positive_real(std::string_view text, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(text), &used);
    if (used != text.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("cannot parse ") + what + " '" +
                     std::string(text) + "'");
  }
}

}  // namespace detail

// Kernel choice. The text grammar is
//   linear | quadratic | ibs | l2 | gower | rbf:<rho> | poly:<c>:<d>
// linear and quadratic are aliases of poly:0:1 and poly:1:2 and share its
// code path bit for bit.
struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double rho = 0.0;    // rbf weight
  double shift = 0.0;  // poly constant c
  int degree = 1;      // poly exponent d

  static KernelSpec linear() { return KernelSpec{}; }
  static KernelSpec quadratic() { return KernelSpec{KernelKind::quadratic, 0.0, 1.0, 2}; }
  static KernelSpec ibs() { return KernelSpec{KernelKind::ibs, 0.0, 0.0, 0}; }
  static KernelSpec l2() { return KernelSpec{KernelKind::l2, 0.0, 0.0, 0}; }
  static KernelSpec gower() { return KernelSpec{KernelKind::gower, 0.0, 0.0, 0}; }

  static KernelSpec rbf(double rho) {
    if (!(rho > 0.0))
      throw InvalidParameter("rbf weight must be positive, got " +
                             detail::format_g(rho));
    return KernelSpec{KernelKind::rbf, rho, 0.0, 0};
  }

  static KernelSpec poly(double shift, int degree) {
    if (degree < 1)
      throw InvalidParameter("polynomial degree must be >= 1, got " +
                             std::to_string(degree));
    if (shift < 0.0)
      throw InvalidParameter("polynomial shift must be >= 0, got " +
                             detail::format_g(shift));
    return KernelSpec{KernelKind::poly, 0.0, shift, degree};
  }

  static KernelSpec parse(std::string_view text) {
    if (text == "linear") return linear();
    if (text == "quadratic") return quadratic();
    if (text == "ibs") return ibs();
    if (text == "l2") return l2();
    if (text == "gower") return gower();
    if (text.rfind("rbf:", 0) == 0)
      return rbf(detail::parse_positive_real(text.substr(4), "rbf weight"));
    if (text.rfind("poly:", 0) == 0) {
      const std::string_view rest = text.substr(5);
      const std::size_t sep = rest.find(':');
      if (sep == std::string_view::npos)
        throw UsageError("polynomial kernel spec needs poly:<c>:<d>, got '" +
                         std::string(text) + "'");
      const double c =
          detail::parse_positive_real(rest.substr(0, sep), "polynomial shift");
      const double d = detail::parse_positive_real(rest.substr(sep + 1),
                                                   "polynomial degree");
      if (d != double(int(d)))
        throw UsageError("polynomial degree must be an integer, got '" +
                         std::string(rest.substr(sep + 1)) + "'");
      return poly(c, int(d));
    }
    throw UsageError("unknown kernel spec '" + std::string(text) +
                     "'; expected linear|quadratic|ibs|l2|gower|rbf:<rho>|poly:<c>:<d>");
  }

  std::string str() const {
    switch (kind) {
      case KernelKind::linear: return "linear";
      case KernelKind::quadratic: return "quadratic";
      case KernelKind::ibs: return "ibs";
      case KernelKind::l2: return "l2";
      case KernelKind::gower: return "gower";
      case KernelKind::rbf: return "rbf:" + detail::format_g(rho);
      case KernelKind::poly:
        return "poly:" + detail::format_g(shift) + ":" + std::to_string(degree);
    }
    return "?";
  }

  bool needs_genotypes() const { return kind == KernelKind::ibs; }
};

inline bool operator==(const KernelSpec& a, const KernelSpec& b) {
  return a.kind == b.kind && a.rho == b.rho && a.shift == b.shift &&
         a.degree == b.degree;
}

}  // namespace kdc
