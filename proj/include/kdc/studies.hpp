#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kdc/assoc.hpp"
#include "kdc/simgen.hpp"

namespace kdc {

// One table row: which statistic family is reported and the kernels it uses.
// KMR rows always test through the linear phenotype kernel, which is why they
// coincide with KDC(L=linear) rows under shared seeds.
struct MethodSpec {
  std::string family;  // "KMR" or "KDC"
  KernelSpec kernel_k;
  KernelSpec kernel_l;
  bool adjusted = true;

  std::string label() const {
    return family + " " + method_descriptor(kernel_k, kernel_l, adjusted);
  }
};

struct StudyCondition {
  double a = 0.0;
  std::string sigma;   // empty when the study has a single error structure
  std::string effect;  // empty when the study has a single effect shape
  std::function<Dataset(std::uint64_t)> generate;
  std::vector<std::size_t> method_rows;  // indices into the method list
};

struct StudyCell {
  MethodSpec method;
  double a = 0.0;
  std::string sigma;
  std::string effect;
  std::int64_t rejections = 0;
  double rate = 0.0;
};

struct StudyResult {
  std::string study;
  int replicates = 0;
  std::int64_t permutations = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::vector<StudyCell> cells;
  std::map<std::string, std::string> log;  // generated inputs worth recording
};

namespace detail {

inline std::string join_values(const Vector& v) {
  std::ostringstream out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out << ',';
    out << format_g(v[i]);
  }
  return out.str();
}

}  // namespace detail

// Size/power grid. Every replicate draws one dataset seed and one permutation
// seed, and both are shared by every condition and method, so that cells
// differ only through the condition itself (common random numbers) and
// duplicated method rows match bit for bit.
inline StudyResult size_power_study(
    const std::vector<MethodSpec>& methods,
    const std::vector<StudyCondition>& conditions, int replicates,
    std::int64_t permutations, double alpha, std::uint64_t seed,
    int threads = 1) {
  if (replicates < 1)
    throw InvalidParameter("replicate count must be >= 1, got " +
                           std::to_string(replicates));
  if (permutations < 100)
    throw InvalidParameter("study needs at least 100 permutations, got " +
                           std::to_string(permutations));
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw InvalidParameter("alpha must lie in (0, 1)");
  if (methods.empty() || conditions.empty())
    throw InvalidParameter("study needs at least one method and condition");
  for (const StudyCondition& c : conditions)
    for (const std::size_t row : c.method_rows)
      if (row >= methods.size())
        throw InvalidParameter("condition references a missing method row");

  StudyResult out;
  out.replicates = replicates;
  out.permutations = permutations;
  out.alpha = alpha;
  out.seed = seed;
  for (const StudyCondition& c : conditions)
    for (const std::size_t row : c.method_rows)
      out.cells.push_back({methods[row], c.a, c.sigma, c.effect, 0, 0.0});

  // per-replicate hit bits, aggregated after the parallel section so the
  // totals do not depend on scheduling
  std::vector<std::vector<std::uint8_t>> hits(
      out.cells.size(), std::vector<std::uint8_t>(std::size_t(replicates), 0));

  const auto run_replicate = [&](int rep) {
    const std::uint64_t replicate_key = substream(seed, std::uint64_t(rep));
    const std::uint64_t data_seed = substream(replicate_key, 0);
    PermutationPlan plan;
    plan.n_permutations = permutations;
    plan.seed = substream(replicate_key, 1);
    plan.scheme = PermutationScheme::monte_carlo;

    std::size_t cell = 0;
    for (const StudyCondition& c : conditions) {
      const Dataset data = c.generate(data_seed);
      std::optional<Matrix> adjusted;
      std::map<std::string, Matrix> k_cache;
      std::map<std::string, Matrix> m_cache;
      for (const std::size_t row : c.method_rows) {
        const MethodSpec& m = methods[row];

        auto k_it = k_cache.find(m.kernel_k.str());
        if (k_it == k_cache.end())
          k_it = k_cache
                     .emplace(m.kernel_k.str(),
                              build_kernel(m.kernel_k, data.z).values)
                     .first;

        const std::string l_key =
            m.kernel_l.str() + (m.adjusted ? "|adj" : "|raw");
        auto m_it = m_cache.find(l_key);
        if (m_it == m_cache.end()) {
          const Matrix* response = &data.y;
          if (m.adjusted) {
            if (!adjusted)
              adjusted = residualize(data.y, CovariateMatrix{data.x, true})
                             .residuals;
            response = &*adjusted;
          }
          m_it = m_cache
                     .emplace(l_key, double_center(build_kernel(m.kernel_l,
                                                                *response))
                                         .values)
                     .first;
        }

        const TestResult r = detail::permutation_test_centered(
            k_it->second, m_it->second, plan, 1);
        hits[cell][std::size_t(rep)] = r.p_value <= alpha ? 1 : 0;
        ++cell;
      }
    }
  };

  const int workers = std::max(1, std::min(threads, replicates));
  if (workers == 1) {
    for (int rep = 0; rep < replicates; ++rep) run_replicate(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int rep = next.fetch_add(1); rep < replicates;
             rep = next.fetch_add(1))
          run_replicate(rep);
      });
    for (auto& t : pool) t.join();
  }

  for (std::size_t cell = 0; cell < out.cells.size(); ++cell) {
    std::int64_t total = 0;
    for (const std::uint8_t h : hits[cell]) total += h;
    out.cells[cell].rejections = total;
    out.cells[cell].rate = double(total) / double(replicates);
  }
  return out;
}

inline std::vector<MethodSpec> sim1_default_methods() {
  const KernelSpec lin = KernelSpec::linear();
  const KernelSpec quad = KernelSpec::quadratic();
  const KernelSpec l2 = KernelSpec::l2();
  return {
      {"KMR", lin, lin, true},  {"KMR", quad, lin, true},
      {"KDC", l2, l2, true},    {"KDC", lin, lin, true},
      {"KDC", quad, lin, true}, {"KDC", lin, quad, true},
      {"KDC", quad, quad, true},
  };
}

// shared row layout of the multivariate studies
inline std::vector<MethodSpec> table_default_methods(bool adjusted) {
  const KernelSpec lin = KernelSpec::linear();
  const KernelSpec quad = KernelSpec::quadratic();
  const KernelSpec ibs = KernelSpec::ibs();
  const KernelSpec l2 = KernelSpec::l2();
  return {
      {"KMR", lin, lin, adjusted},  {"KMR", quad, lin, adjusted},
      {"KMR", ibs, lin, adjusted},  {"KDC", l2, l2, adjusted},
      {"KDC", lin, lin, adjusted},  {"KDC", quad, lin, adjusted},
      {"KDC", ibs, lin, adjusted},  {"KDC", lin, quad, adjusted},
      {"KDC", quad, quad, adjusted}, {"KDC", ibs, quad, adjusted},
  };
}

// KDC rows with a Gaussian phenotype kernel over a grid of weights
inline std::vector<MethodSpec> rbf_sweep_methods() {
  std::vector<MethodSpec> methods;
  for (const double rho : {0.1, 0.5, 1.0, 5.0, 10.0})
    for (const KernelSpec& k : {KernelSpec::linear(), KernelSpec::quadratic(),
                                KernelSpec::ibs()})
      methods.push_back({"KDC", k, KernelSpec::rbf(rho), true});
  return methods;
}

struct StudyParams {
  int replicates = 1000;
  std::int64_t permutations = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct Sim1StudyParams : StudyParams {
  Index n = 60;
  std::vector<double> a_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  double beta0 = 0.0;
  double beta = 1.0;
  std::optional<std::vector<MethodSpec>> methods;
};

inline StudyResult run_sim1_study(const Sim1StudyParams& params) {
  const std::vector<MethodSpec> methods =
      params.methods ? *params.methods : sim1_default_methods();
  std::vector<std::size_t> all_rows(methods.size());
  for (std::size_t i = 0; i < methods.size(); ++i) all_rows[i] = i;

  std::vector<StudyCondition> conditions;
  for (const double a : params.a_grid) {
    Sim1Config cfg;
    cfg.n = params.n;
    cfg.a = a;
    cfg.beta0 = params.beta0;
    cfg.beta = params.beta;
    conditions.push_back(
        {a, "", "",
         [cfg](std::uint64_t s) { return sim1_generate(cfg, s); }, all_rows});
  }
  StudyResult out =
      size_power_study(methods, conditions, params.replicates,
                       params.permutations, params.alpha, params.seed,
                       params.threads);
  out.study = "sim1";
  return out;
}

struct Sim2StudyParams : StudyParams {
  Index n = 100;
  std::vector<double> a_grid{0.0, 0.1, 0.2};
  std::vector<Sim2Sigma> sigma_grid{Sim2Sigma::independent,
                                    Sim2Sigma::dependent};
  std::vector<Sim2Effect> effect_grid{Sim2Effect::sparse, Sim2Effect::common};
  bool include_unadjusted = true;  // raw-phenotype rows at a > 0
  std::optional<Vector> maf;
  std::optional<std::vector<MethodSpec>> methods;
};

inline StudyResult run_sim2_study(const Sim2StudyParams& params) {
  std::vector<MethodSpec> methods;
  if (params.methods) {
    methods = *params.methods;
  } else {
    methods = table_default_methods(true);
    if (params.include_unadjusted) {
      const std::vector<MethodSpec> raw = table_default_methods(false);
      methods.insert(methods.end(), raw.begin(), raw.end());
    }
  }
  std::vector<std::size_t> adjusted_rows;
  std::vector<std::size_t> all_rows;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    all_rows.push_back(i);
    if (methods[i].adjusted) adjusted_rows.push_back(i);
  }

  const Vector maf =
      params.maf ? *params.maf : default_maf(9, params.seed);

  std::vector<StudyCondition> conditions;
  for (const Sim2Sigma sigma : params.sigma_grid)
    for (const Sim2Effect effect : params.effect_grid)
      for (const double a : params.a_grid) {
        Sim2Config cfg;
        cfg.n = params.n;
        cfg.a = a;
        cfg.effect = effect;
        cfg.sigma = sigma;
        cfg.maf = maf;
        // the size table reports adjusted rows only; raw rows enter at a > 0
        conditions.push_back(
            {a, to_string(sigma), to_string(effect),
             [cfg](std::uint64_t s) { return sim2_generate(cfg, s); },
             a > 0.0 ? all_rows : adjusted_rows});
      }
  StudyResult out =
      size_power_study(methods, conditions, params.replicates,
                       params.permutations, params.alpha, params.seed,
                       params.threads);
  out.study = "sim2";
  out.log["maf"] = detail::join_values(maf);
  return out;
}

struct AdniStudyParams : StudyParams {
  Index n = 100;
  std::vector<double> a_grid{0.0, 0.05, 0.1};
  bool rbf_sweep = false;
  std::optional<Vector> maf;
  std::optional<std::vector<MethodSpec>> methods;
};

inline StudyResult run_adni_study(const AdniStudyParams& params) {
  const std::vector<MethodSpec> methods =
      params.methods ? *params.methods
                     : (params.rbf_sweep ? rbf_sweep_methods()
                                         : table_default_methods(true));
  std::vector<std::size_t> all_rows(methods.size());
  for (std::size_t i = 0; i < methods.size(); ++i) all_rows[i] = i;

  const Vector maf =
      params.maf ? *params.maf : default_maf(141, params.seed);

  std::vector<StudyCondition> conditions;
  for (const double a : params.a_grid) {
    AdniSimConfig cfg;
    cfg.n = params.n;
    cfg.a = a;
    cfg.maf = maf;
    conditions.push_back(
        {a, "", "",
         [cfg](std::uint64_t s) { return adni_sim_generate(cfg, s); },
         all_rows});
  }
  StudyResult out =
      size_power_study(methods, conditions, params.replicates,
                       params.permutations, params.alpha, params.seed,
                       params.threads);
  out.study = "adni";
  out.log["maf"] = detail::join_values(maf);
  const PsdProjection proj = psd_factor(adni_roi_correlation(), 1e-8);
  if (!proj.clipped.empty()) {
    Vector clipped(Index(proj.clipped.size()));
    for (Index i = 0; i < clipped.size(); ++i)
      clipped[i] = proj.clipped[std::size_t(i)];
    out.log["clipped_eigenvalues"] = detail::join_values(clipped);
  }
  return out;
}

}  // namespace kdc
