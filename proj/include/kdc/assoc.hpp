#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kdc/kernels.hpp"
#include "kdc/linreg.hpp"
#include "kdc/rng.hpp"
#include "kdc/types.hpp"

namespace kdc {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::int64_t n_permutations = 0;
  std::uint64_t seed = 0;
  std::string method;
};

enum class PermutationScheme { monte_carlo, full_enumeration };

struct PermutationPlan {
  std::int64_t n_permutations = 10000;
  std::uint64_t seed = 0;
  PermutationScheme scheme = PermutationScheme::monte_carlo;
};

// Distance-covariance style statistic: tr(K H L H)/n^2 via the centered
// counterpart of L.
inline double kdc_statistic(const GramMatrix& k, const GramMatrix& l) {
  require_gram(k, "K");
  require_gram(l, "L");
  if (k.n() != l.n())
    throw InvalidInput("K and L differ in size (" + std::to_string(k.n()) +
                       " vs " + std::to_string(l.n()) + ")");
  const Index n = k.n();
  const Matrix m = double_center(l).values;
  return k.values.cwiseProduct(m).sum() / (double(n) * double(n));
}

// Score statistic tr(Yc' K Yc) over column-centered responses Yc; equals
// n^2 * kdc_statistic(K, Yc Yc').
inline double kmr_score(const GramMatrix& k, const Matrix& y_adj) {
  require_gram(k, "K");
  require_sample_matrix(y_adj, "response matrix");
  if (y_adj.rows() != k.n())
    throw InvalidInput("response rows do not match kernel size");
  Matrix centered = y_adj;
  centered.rowwise() -= y_adj.colwise().mean();
  return centered.cwiseProduct(k.values * centered).sum();
}

namespace detail {

// sum_ij K[p(i),p(j)] M[i,j] as a symmetric half-sum; both matrices must be
// symmetric. Every permuted statistic and the observed one go through this
// exact accumulation so that ">= observed" tie decisions are reproducible.
inline double permuted_dot(const Matrix& k, const Matrix& m,
                           const std::vector<int>& perm) {
  const Index n = k.rows();
  const double* kd = k.data();
  const double* md = m.data();
  const int* p = perm.data();
  double off = 0.0;
  double diag = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double* kcol = kd + Index(p[j]) * n;
    const double* mcol = md + j * n;
    // four fixed-order accumulators: same result on every run, no latency
    // chain on a single register
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    Index i = 0;
    for (; i + 4 <= j; i += 4) {
      a0 += kcol[p[i]] * mcol[i];
      a1 += kcol[p[i + 1]] * mcol[i + 1];
      a2 += kcol[p[i + 2]] * mcol[i + 2];
      a3 += kcol[p[i + 3]] * mcol[i + 3];
    }
    for (; i < j; ++i) a0 += kcol[p[i]] * mcol[i];
    off += (a0 + a1) + (a2 + a3);
    diag += kcol[p[j]] * mcol[j];
  }
  return 2.0 * off + diag;
}

inline std::int64_t count_exceedances(const Matrix& k, const Matrix& m,
                                      double observed, std::uint64_t seed,
                                      std::int64_t begin, std::int64_t end) {
  std::vector<int> perm(static_cast<std::size_t>(k.rows()));
  std::int64_t count = 0;
  for (std::int64_t b = begin; b < end; ++b) {
    random_permutation(seed, static_cast<std::uint64_t>(b), perm);
    if (permuted_dot(k, m, perm) >= observed) ++count;
  }
  return count;
}

// Permutation test against a precomputed centered matrix M = H L H. The
// observed statistic uses the identity permutation of the same routine, ties
// count as extreme, and permutation b is a pure function of (seed, b), so the
// result is identical for any worker count.
inline TestResult permutation_test_centered(const Matrix& kv, const Matrix& mv,
                                            const PermutationPlan& plan,
                                            int threads = 1) {
  const Index n = kv.rows();
  if (n < 3) throw TooFewSamples("permutation test needs at least 3 samples");
  std::vector<int> identity(static_cast<std::size_t>(n));
  std::iota(identity.begin(), identity.end(), 0);
  const double observed = permuted_dot(kv, mv, identity);
  const double inv_n2 = 1.0 / (double(n) * double(n));

  TestResult out;
  out.seed = plan.seed;
  out.statistic = observed * inv_n2;

  if (plan.scheme == PermutationScheme::full_enumeration) {
    if (n > 8)
      throw TooLarge("full enumeration supports at most 8 samples, got " +
                     std::to_string(n));
    std::vector<int> perm = identity;
    std::int64_t total = 0;
    std::int64_t count = 0;
    do {
      ++total;
      if (permuted_dot(kv, mv, perm) >= observed) ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.n_permutations = total;
    out.p_value = double(count) / double(total);
    return out;
  }

  const std::int64_t b_total = plan.n_permutations;
  if (b_total < 1)
    throw InvalidParameter("permutation count must be >= 1, got " +
                           std::to_string(b_total));
  std::int64_t count = 0;
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(
                                             std::min<std::int64_t>(b_total, 256))));
  if (workers == 1) {
    count = count_exceedances(kv, mv, observed, plan.seed, 0, b_total);
  } else {
    std::vector<std::int64_t> partial(static_cast<std::size_t>(workers), 0);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const std::int64_t begin = b_total * w / workers;
      const std::int64_t end = b_total * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] {
        partial[static_cast<std::size_t>(w)] =
            count_exceedances(kv, mv, observed, plan.seed, begin, end);
      });
    }
    for (auto& t : pool) t.join();
    for (const std::int64_t c : partial) count += c;
  }
  out.n_permutations = b_total;
  out.p_value = (1.0 + double(count)) / (1.0 + double(b_total));
  return out;
}

}  // namespace detail

// Permutation test of association between K and L; relabels K against the
// centered L. Monte Carlo p uses the add-one rule (1 + #{T_pi >= T_obs}) /
// (1 + B); full enumeration uses the exact count over all n! relabelings.
inline TestResult permutation_test(const GramMatrix& k, const GramMatrix& l,
                                   const PermutationPlan& plan,
                                   int threads = 1) {
  require_gram(k, "K");
  require_gram(l, "L");
  if (k.n() != l.n())
    throw InvalidInput("K and L differ in size (" + std::to_string(k.n()) +
                       " vs " + std::to_string(l.n()) + ")");
  const Matrix m = double_center(l).values;
  return detail::permutation_test_centered(k.values, m, plan, threads);
}

inline TestResult full_enumeration_test(const GramMatrix& k,
                                        const GramMatrix& l) {
  PermutationPlan plan;
  plan.n_permutations = 0;
  plan.seed = 0;
  plan.scheme = PermutationScheme::full_enumeration;
  return permutation_test(k, l, plan, 1);
}

inline std::string method_descriptor(const KernelSpec& spec_k,
                                     const KernelSpec& spec_l, bool adjusted) {
  return "K=" + spec_k.str() + " L=" + spec_l.str() +
         (adjusted ? " adjusted" : " unadjusted");
}

// End-to-end test: residualize Y on X when covariates are given, build both
// kernels, permute.
inline TestResult run_test(const Matrix& y, const Matrix& z,
                           const std::optional<CovariateMatrix>& covariates,
                           const KernelSpec& spec_k, const KernelSpec& spec_l,
                           const PermutationPlan& plan, int threads = 1) {
  require_sample_matrix(y, "phenotype matrix");
  require_sample_matrix(z, "genotype matrix");
  if (y.rows() != z.rows())
    throw InvalidInput("phenotype rows (" + std::to_string(y.rows()) +
                       ") do not match genotype rows (" +
                       std::to_string(z.rows()) + ")");
  if (covariates && covariates->values.cols() > 0 &&
      covariates->values.rows() != y.rows())
    throw InvalidInput("covariate rows do not match phenotype rows");
  if (plan.scheme == PermutationScheme::monte_carlo && plan.n_permutations < 1)
    throw InvalidParameter("permutation count must be >= 1");

  const Matrix y_adj =
      covariates ? residualize(y, *covariates).residuals : y;
  const GramMatrix k = build_kernel(spec_k, z);
  const GramMatrix l = build_kernel(spec_l, y_adj);
  TestResult out = permutation_test(k, l, plan, threads);
  out.method = method_descriptor(spec_k, spec_l, covariates.has_value());
  return out;
}

}  // namespace kdc
