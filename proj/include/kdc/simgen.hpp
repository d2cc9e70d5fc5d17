#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "kdc/rng.hpp"
#include "kdc/types.hpp"

namespace kdc {

struct Dataset {
  Matrix y;
  Matrix x;
  Matrix z;
};

namespace detail {

inline double h1_core(double z1, double z2, double z3, double z4, double z5) {
  return 2.0 * std::cos(z1) - 3.0 * z2 * z2 + 2.0 * std::exp(-z3) * z4 -
         1.6 * std::sin(z5) * std::cos(z3) + 4.0 * z1 * z5;
}

inline void require_maf(const Vector& maf, Index expected) {
  if (maf.size() != expected)
    throw InvalidParameter("need " + std::to_string(expected) +
                           " minor-allele frequencies, got " +
                           std::to_string(maf.size()));
  for (Index j = 0; j < maf.size(); ++j)
    if (!(maf[j] > 0.0) || maf[j] > 0.5)
      throw InvalidParameter("minor-allele frequency " + std::to_string(j + 1) +
                             " must lie in (0, 0.5], got " +
                             format_g(maf[j]));
}

// one genotype column of Binomial(2, maf) draws from a single uniform each
inline void fill_genotype_column(Matrix& z, Index col, double maf,
                                 SplitMix64& gen) {
  const double p0 = (1.0 - maf) * (1.0 - maf);
  const double p01 = p0 + 2.0 * maf * (1.0 - maf);
  for (Index i = 0; i < z.rows(); ++i) {
    const double u = uniform01(gen);
    z(i, col) = u < p0 ? 0.0 : (u < p01 ? 1.0 : 2.0);
  }
}

}  // namespace detail

// Nonlinear signal used by the univariate and imaging-style generators.
inline double h1(const Vector& z) {
  if (z.size() != 5)
    throw InvalidInput("h1 expects a 5-vector, got size " +
                       std::to_string(z.size()));
  if (!z.allFinite()) throw InvalidInput("h1 input has non-finite entries");
  return detail::h1_core(z[0], z[1], z[2], z[3], z[4]);
}

// Univariate phenotype with a confounded covariate:
//   Z ~ U(0,1)^5, X = 3 cos(Z1) + u, Y = b0 + b X + a h1(Z) + eps.
struct Sim1Config {
  Index n = 60;
  double a = 0.0;
  double beta0 = 0.0;
  double beta = 1.0;
};

inline Dataset sim1_generate(const Sim1Config& cfg, std::uint64_t seed) {
  if (cfg.n < 10)
    throw InvalidParameter("sim1 needs n >= 10, got " + std::to_string(cfg.n));
  if (!(cfg.a >= 0.0))
    throw InvalidParameter("signal strength a must be >= 0");
  SplitMix64 gen(substream(seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index n = cfg.n;

  Matrix z(n, 5);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < 5; ++j) z(i, j) = uniform01(gen);

  Matrix x(n, 1);
  for (Index i = 0; i < n; ++i) x(i, 0) = 3.0 * std::cos(z(i, 0)) + normal(gen);

  Matrix y(n, 1);
  for (Index i = 0; i < n; ++i) {
    const double h =
        detail::h1_core(z(i, 0), z(i, 1), z(i, 2), z(i, 3), z(i, 4));
    y(i, 0) = cfg.beta0 + cfg.beta * x(i, 0) + cfg.a * h + normal(gen);
  }
  return {std::move(y), std::move(x), std::move(z)};
}

enum class Sim2Effect { sparse, common };
enum class Sim2Sigma { independent, dependent };

inline const char* to_string(Sim2Effect e) {
  return e == Sim2Effect::sparse ? "sparse" : "common";
}
inline const char* to_string(Sim2Sigma s) {
  return s == Sim2Sigma::independent ? "independent" : "dependent";
}

inline const Matrix& sim2_sigma_independent() {
  static const Matrix s = [] {
    Matrix m(3, 3);
    m << 0.95, 0.0, 0.0,
         0.0, 0.86, 0.0,
         0.0, 0.0, 0.89;
    return m;
  }();
  return s;
}

inline const Matrix& sim2_sigma_dependent() {
  static const Matrix s = [] {
    Matrix m(3, 3);
    m << 0.95, 0.57, 0.43,
         0.57, 0.86, 0.24,
         0.43, 0.24, 0.89;
    return m;
  }();
  return s;
}

// Three phenotypes, nine genotyped loci, two Gaussian covariates. The sparse
// effect loads h on the first phenotype only; the common effect adds a z3
// shift to every phenotype.
struct Sim2Config {
  Index n = 100;
  double a = 0.0;
  Sim2Effect effect = Sim2Effect::sparse;
  Sim2Sigma sigma = Sim2Sigma::independent;
  Vector maf;                        // 9 entries in (0, 0.5]
  Matrix beta = Matrix::Ones(2, 3);  // covariate loadings
};

inline Dataset sim2_generate(const Sim2Config& cfg, std::uint64_t seed) {
  if (cfg.n < 10)
    throw InvalidParameter("sim2 needs n >= 10, got " + std::to_string(cfg.n));
  if (!(cfg.a >= 0.0))
    throw InvalidParameter("signal strength a must be >= 0");
  detail::require_maf(cfg.maf, 9);
  if (cfg.beta.rows() != 2 || cfg.beta.cols() != 3)
    throw InvalidParameter("sim2 covariate loadings must be 2x3");
  SplitMix64 gen(substream(seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index n = cfg.n;

  Matrix z(n, 9);
  for (Index j = 0; j < 9; ++j)
    detail::fill_genotype_column(z, j, cfg.maf[j], gen);

  Matrix x(n, 2);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = 0.2 + normal(gen);
    x(i, 1) = 0.4 + normal(gen);
  }

  const Matrix& sigma = cfg.sigma == Sim2Sigma::independent
                            ? sim2_sigma_independent()
                            : sim2_sigma_dependent();
  const Matrix lower = Eigen::LLT<Matrix>(sigma).matrixL();
  Matrix eps(n, 3);
  Vector w(3);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < 3; ++c) w[c] = normal(gen);
    eps.row(i) = (lower * w).transpose();
  }

  Matrix shift = Matrix::Zero(n, 3);
  for (Index i = 0; i < n; ++i) {
    const double h =
        cfg.a * (z(i, 0) + z(i, 1) + z(i, 2) + z(i, 0) * z(i, 3) * z(i, 4) -
                 z(i, 5) / 3.0 - z(i, 6) * z(i, 7) / 2.0 + (1.0 - z(i, 8)));
    if (cfg.effect == Sim2Effect::sparse) {
      shift(i, 0) = h;
    } else {
      const double common = cfg.a * z(i, 2);
      shift(i, 0) = h + common;
      shift(i, 1) = common;
      shift(i, 2) = common;
    }
  }

  Matrix y = x * cfg.beta + shift + eps;
  return {std::move(y), std::move(x), std::move(z)};
}

// row-roi correlations of the imaging phenotypes
inline const Matrix& adni_roi_correlation() {
  static const Matrix r = [] {
    Matrix m(8, 8);
    m << 1.00, 0.95, 0.97, 0.87, 0.53, 0.97, -0.99, -0.87,
         0.95, 1.00, 1.00, 0.98, 0.77, 1.00, -0.90, -0.66,
         0.97, 1.00, 1.00, 0.96, 0.72, 1.00, -0.94, -0.72,
         0.87, 0.98, 0.96, 1.00, 0.88, 0.97, -0.81, -0.51,
         0.53, 0.77, 0.72, 0.88, 1.00, 0.73, -0.43, -0.04,
         0.97, 1.00, 1.00, 0.97, 0.73, 1.00, -0.93, -0.71,
         -0.99, -0.90, -0.94, -0.81, -0.43, -0.93, 1.00, 0.92,
         -0.87, -0.66, -0.72, -0.51, -0.04, -0.71, 0.92, 1.00;
    return m;
  }();
  return r;
}

inline void validate_correlation_matrix(const Matrix& r) {
  if (r.rows() != r.cols())
    throw InvalidInput("correlation matrix is not square");
  for (Index i = 0; i < r.rows(); ++i)
    if (r(i, i) != 1.0)
      throw InvalidInput("correlation matrix diagonal must be 1 (row " +
                         std::to_string(i + 1) + ")");
  for (Index j = 0; j < r.cols(); ++j)
    for (Index i = 0; i < r.rows(); ++i) {
      if (r(i, j) != r(j, i))
        throw InvalidInput("correlation matrix is not symmetric at (" +
                           std::to_string(i + 1) + "," + std::to_string(j + 1) +
                           ")");
      if (std::abs(r(i, j)) > 1.0)
        throw InvalidInput("correlation entries must lie in [-1, 1]");
    }
}

// Eigenvalue-clipped square root of a symmetric matrix; sampling with the
// factor reproduces the nearest PSD covariance when the input has small
// negative eigenvalues.
struct PsdProjection {
  Matrix factor;                   // F with F F' = V max(lambda, floor) V'
  Vector eigenvalues;              // of the input, ascending
  std::vector<double> clipped;     // eigenvalues raised to the floor
};

inline PsdProjection psd_factor(const Matrix& sym, double floor_value) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success)
    throw InvalidInput("eigendecomposition failed");
  PsdProjection out;
  out.eigenvalues = es.eigenvalues();
  Vector lam = es.eigenvalues();
  for (Index i = 0; i < lam.size(); ++i)
    if (lam[i] < floor_value) {
      out.clipped.push_back(lam[i]);
      lam[i] = floor_value;
    }
  out.factor = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
  return out;
}

// Imaging-style study: 8 ROI phenotypes with the empirical correlation
// structure, 141 loci, gender/age covariates, and the h1 signal of the first
// five loci added to every phenotype.
struct AdniSimConfig {
  Index n = 100;
  double a = 0.0;
  Vector maf;                        // 141 entries in (0, 0.5]
  Matrix beta = Matrix::Ones(2, 8);  // gender/age loadings
  Vector loading = Vector::Ones(8);  // per-phenotype weight on the shift
  double gender_rate = 0.36;
  double eig_floor = 1e-8;
};

inline Dataset adni_sim_generate(const AdniSimConfig& cfg, std::uint64_t seed) {
  if (cfg.n < 10)
    throw InvalidParameter("adni sim needs n >= 10, got " +
                           std::to_string(cfg.n));
  if (!(cfg.a >= 0.0))
    throw InvalidParameter("signal strength a must be >= 0");
  detail::require_maf(cfg.maf, 141);
  if (cfg.beta.rows() != 2 || cfg.beta.cols() != 8)
    throw InvalidParameter("adni covariate loadings must be 2x8");
  if (cfg.loading.size() != 8)
    throw InvalidParameter("adni phenotype loading must have 8 entries");
  if (!(cfg.gender_rate > 0.0) || !(cfg.gender_rate < 1.0))
    throw InvalidParameter("gender rate must lie in (0, 1)");
  const Matrix& r = adni_roi_correlation();
  validate_correlation_matrix(r);
  const PsdProjection proj = psd_factor(r, cfg.eig_floor);

  SplitMix64 gen(substream(seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index n = cfg.n;

  Matrix z(n, 141);
  for (Index j = 0; j < 141; ++j)
    detail::fill_genotype_column(z, j, cfg.maf[j], gen);

  Matrix x(n, 2);
  for (Index i = 0; i < n; ++i)
    x(i, 0) = uniform01(gen) < cfg.gender_rate ? 1.0 : 0.0;
  for (Index i = 0; i < n; ++i) x(i, 1) = normal(gen);

  Matrix y = x * cfg.beta;
  for (Index i = 0; i < n; ++i) {
    const double h =
        cfg.a * detail::h1_core(z(i, 0), z(i, 1), z(i, 2), z(i, 3), z(i, 4));
    y.row(i) += h * cfg.loading.transpose();
  }
  Vector w(8);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < 8; ++c) w[c] = normal(gen);
    y.row(i) += (proj.factor * w).transpose();
  }
  return {std::move(y), std::move(x), std::move(z)};
}

// Minor-allele frequencies drawn once per study from U(0.1, 0.4).
inline Vector default_maf(Index count, std::uint64_t seed) {
  SplitMix64 gen(substream(seed, 0x6d6166));
  Vector maf(count);
  for (Index j = 0; j < count; ++j) maf[j] = 0.1 + 0.3 * uniform01(gen);
  return maf;
}

}  // namespace kdc
